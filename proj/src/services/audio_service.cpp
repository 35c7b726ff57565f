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

#include <map>

#include "ipcfuzz/services.hpp"
#include "service_impls.hpp"

namespace ipcfuzz::services {

namespace {

// Exported per-client object; accepts no direct calls.
class AudioSession : public Service {
public:
    explicit AudioSession(std::string name) : mName(std::move(name)) {}

    Reply onTransact(MethodCode, Parcel&, DispatchContext&) override {
        return Reply::rejected("session objects accept no transactions");
    }

    const std::string& name() const { return mName; }

private:
    std::string mName;
};

class AudioService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "audio.onTransact");
        switch (code) {
            case audio::kPlay: return play(data);
            case audio::kRegisterClient: return registerClient(data, ctx);
            case audio::kCreateSession: return createSession(data, ctx);
            case audio::kStartSession: return startSession(data, ctx);
            default: return Reply::rejected("unknown transaction code");
        }
    }

private:
    Reply play(Parcel& data) {
        std::string track;
        try {
            track = data.readString("track");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad track: ") + e.what());
        }
        if (track.empty() || track.size() > 256) return Reply::rejected("invalid track name");
        mLastTrack = std::move(track);
        Parcel reply;
        reply.writeBool(true);
        return Reply::ok(std::move(reply));
    }

    // Only ever called by the middleware, so nothing here is checked: a
    // missing or dead callback is dereferenced as-is.
    Reply registerClient(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "audio.registerClient");
        std::optional<Handle> callback;
        std::optional<std::string> name;
        try {
            callback = data.readHandle("callback").handle;
        } catch (const ParcelError&) {
        }
        try {
            name = data.readString("name");
        } catch (const ParcelError&) {
        }
        Service* target = callback ? ctx.router().lookup(*callback) : nullptr;
        if (target == nullptr || !name) {
            ctx.crash(ExceptionKind::NullDeref, "audio.registerClient.use_callback",
                      target == nullptr ? "callback binder is null" : "client name is null");
        }
        mClients[*name] = *callback;
        Parcel reply;
        reply.writeBool(true);
        return Reply::ok(std::move(reply));
    }

    Reply createSession(Parcel& data, DispatchContext& ctx) {
        std::string name;
        try {
            name = data.readString("name");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad session name: ") + e.what());
        }
        if (name.empty() || name.size() > 256) return Reply::rejected("invalid session name");
        Handle session = ctx.router().registerService(
                "", [name] { return std::make_unique<AudioSession>(name); });
        Parcel reply;
        reply.writeHandle(session);
        return Reply::ok(std::move(reply));
    }

    Reply startSession(Parcel& data, DispatchContext& ctx) {
        HandleRead session;
        try {
            session = data.readHandle("session");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad session: ") + e.what());
        }
        if (!session.slotValid) return Reply::rejected("session is not a binder object");
        if (dynamic_cast<AudioSession*>(ctx.router().lookup(session.handle)) == nullptr) {
            return Reply::rejected("no such session");
        }
        ++mStarted;
        Parcel reply;
        reply.writeBool(true);
        return Reply::ok(std::move(reply));
    }

    std::string mLastTrack;
    std::map<std::string, Handle> mClients;
    int mStarted = 0;
};

}  // namespace

std::unique_ptr<Service> make_audio_service() {
    return std::make_unique<AudioService>();
}

}  // namespace ipcfuzz::services
