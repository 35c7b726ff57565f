/*
 * Copyright (C) 2026 The ipcfuzz Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ipcfuzz/services.hpp"

namespace ipcfuzz::services {

Handle get_service(Router& router, const std::string& sender, std::string_view descriptor) {
    Parcel data;
    data.enableWriteLog();
    data.writeString(descriptor);
    Reply reply = router.transact(
            {kServiceManagerHandle, kGetServiceCode, std::move(data), 0, sender});
    if (!reply.isOk()) {
        throw RemoteError(reply.kind(), "service lookup failed for " + std::string(descriptor));
    }
    return reply.payload().readHandle().handle;
}

ClientBase::ClientBase(Router& router, std::string sender, std::string_view descriptor)
      : mRouter(router),
        mSender(std::move(sender)),
        mHandle(get_service(router, mSender, descriptor)) {}

Parcel ClientBase::newParcel() {
    Parcel p;
    p.enableWriteLog();
    return p;
}

Reply ClientBase::call(MethodCode code, Parcel data) {
    return mRouter.transact({mHandle, code, std::move(data), 0, mSender});
}

Reply ClientBase::callChecked(MethodCode code, Parcel data) {
    Reply reply = call(code, std::move(data));
    if (!reply.isOk()) {
        std::string what(to_string(reply.kind()));
        if (reply.kind() == ReplyKind::FatalCrash) {
            what += ": " + std::string(to_string(reply.crash().kind));
        } else {
            what += ": " + reply.message();
        }
        throw RemoteError(reply.kind(), what);
    }
    return reply;
}

// ---------------------------------------------------------------------------

QueueClient::QueueClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kQueue) {}

bool QueueClient::add(std::string_view name) {
    Parcel data = newParcel();
    data.writeString(name);
    return callChecked(queue::kAdd, std::move(data)).payload().readBool();
}

namespace {

std::optional<std::string> optional_string(Reply reply) {
    if (reply.kind() == ReplyKind::Rejected) return std::nullopt;
    if (!reply.isOk()) throw RemoteError(reply.kind(), "queue call failed");
    return reply.payload().readString();
}

}  // namespace

std::optional<std::string> QueueClient::peek() {
    return optional_string(call(queue::kPeek, newParcel()));
}

std::optional<std::string> QueueClient::poll() {
    return optional_string(call(queue::kPoll, newParcel()));
}

std::optional<std::string> QueueClient::remove() {
    return optional_string(call(queue::kRemove, newParcel()));
}

// ---------------------------------------------------------------------------

AudioClient::AudioClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kAudio) {}

void AudioClient::play(std::string_view track) {
    if (track.empty()) throw ClientError("track name must not be empty");
    Parcel data = newParcel();
    data.writeString(track);
    callChecked(audio::kPlay, std::move(data));
}

Handle AudioClient::openSession(std::string_view name) {
    if (name.empty()) throw ClientError("session name must not be empty");
    Parcel create = newParcel();
    create.writeString(name);
    Handle session = callChecked(audio::kCreateSession, std::move(create)).payload().readHandle().handle;

    Parcel reg = newParcel();
    reg.writeHandle(session);
    reg.writeString(name);
    callChecked(audio::kRegisterClient, std::move(reg));
    return session;
}

void AudioClient::startSession(Handle session) {
    Parcel data = newParcel();
    data.writeHandle(session);
    callChecked(audio::kStartSession, std::move(data));
}

// ---------------------------------------------------------------------------

BluetoothClient::BluetoothClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kBluetooth) {}

void BluetoothClient::registerAppConfiguration(int32_t count,
                                               const std::vector<std::string>& names) {
    if (count < 0 || count > bluetooth::kSlotCount) {
        throw ClientError("configuration count " + std::to_string(count) + " outside [0, " +
                          std::to_string(bluetooth::kSlotCount) + "]");
    }
    if (static_cast<size_t>(count) != names.size()) {
        throw ClientError("configuration count does not match the list length");
    }
    Parcel data = newParcel();
    data.writeInt32(count);
    for (const auto& n : names) data.writeString(n);
    callChecked(bluetooth::kRegisterAppConfiguration, std::move(data));
}

int32_t BluetoothClient::state() {
    return callChecked(bluetooth::kGetState, newParcel()).payload().readInt32();
}

// ---------------------------------------------------------------------------

ViewClient::ViewClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kView) {}

int32_t ViewClient::setRemoteViews(std::string_view package, const RemoteViewPayload& views) {
    if (package.empty()) throw ClientError("package must not be empty");
    Parcel data = newParcel();
    data.writeString(package);
    write_remote_views(data, views);
    return callChecked(view::kSetRemoteViews, std::move(data)).payload().readInt32();
}

// ---------------------------------------------------------------------------

GraphicsClient::GraphicsClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kGraphics) {}

uint32_t GraphicsClient::createNativeHandle(std::string_view consumer, int32_t numFds,
                                            int32_t numInts) {
    if (consumer.empty()) throw ClientError("consumer name must not be empty");
    if (numFds < 0 || numInts < 0 || numFds > graphics::kClientMaxSlots ||
        numInts > graphics::kClientMaxSlots) {
        throw ClientError("native handle slot counts out of range");
    }
    Parcel data = newParcel();
    data.writeString(consumer);
    data.writeInt32(numFds);
    data.writeInt32(numInts);
    return static_cast<uint32_t>(
            callChecked(graphics::kCreateNativeHandle, std::move(data)).payload().readInt32());
}

// ---------------------------------------------------------------------------

ActivityClient::ActivityClient(Router& router, std::string sender)
      : ClientBase(router, std::move(sender), kActivity) {}

int32_t ActivityClient::startActivity(const IntentPayload& intent) {
    Parcel data = newParcel();
    write_intent(data, intent);
    return callChecked(activity::kStartActivity, std::move(data)).payload().readInt32();
}

}  // namespace ipcfuzz::services
