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

#include "ipcfuzz/router.hpp"

#include <exception>
#include <sstream>

#include <json.hpp>

namespace ipcfuzz {

std::string_view to_string(ReplyKind kind) {
    switch (kind) {
        case ReplyKind::Ok: return "OK";
        case ReplyKind::Rejected: return "REJECTED";
        case ReplyKind::HandledFault: return "HANDLED_FAULT";
        case ReplyKind::FatalCrash: return "FATAL_CRASH";
    }
    return "?";
}

std::optional<ReplyKind> reply_kind_from_string(std::string_view name) {
    for (auto k : {ReplyKind::Ok, ReplyKind::Rejected, ReplyKind::HandledFault,
                   ReplyKind::FatalCrash}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(ExceptionKind kind) {
    switch (kind) {
        case ExceptionKind::NullDeref: return "NULL_DEREF";
        case ExceptionKind::StackOverflow: return "STACK_OVERFLOW";
        case ExceptionKind::OutOfBounds: return "OUT_OF_BOUNDS";
        case ExceptionKind::MalformedParcel: return "MALFORMED_PARCEL";
        case ExceptionKind::MemoryCorruption: return "MEMORY_CORRUPTION";
        case ExceptionKind::UncaughtException: return "UNCAUGHT_EXCEPTION";
    }
    return "?";
}

std::optional<ExceptionKind> exception_kind_from_string(std::string_view name) {
    for (auto k : {ExceptionKind::NullDeref, ExceptionKind::StackOverflow,
                   ExceptionKind::OutOfBounds, ExceptionKind::MalformedParcel,
                   ExceptionKind::MemoryCorruption, ExceptionKind::UncaughtException}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(Severity severity) {
    return severity == Severity::Critical ? "critical" : "normal";
}

// ---------------------------------------------------------------------------
// Reply

Reply Reply::ok(Parcel payload) {
    payload.setPosition(0);
    return Reply(Body(std::in_place_index<0>, std::move(payload)));
}

Reply Reply::rejected(std::string message) {
    return Reply(Body(Rejected{std::move(message)}));
}

Reply Reply::handledFault(std::string message) {
    return Reply(Body(HandledFault{std::move(message)}));
}

Reply Reply::fatalCrash(CrashInfo crash) {
    if (crash.stackFrames.empty()) throw std::invalid_argument("crash without stack frames");
    return Reply(Body(std::move(crash)));
}

ReplyKind Reply::kind() const {
    return static_cast<ReplyKind>(mBody.index());
}

const Parcel& Reply::payload() const {
    if (auto* p = std::get_if<Parcel>(&mBody)) return *p;
    throw std::logic_error("reply has no payload");
}

Parcel& Reply::payload() {
    if (auto* p = std::get_if<Parcel>(&mBody)) return *p;
    throw std::logic_error("reply has no payload");
}

const std::string& Reply::message() const {
    if (auto* r = std::get_if<Rejected>(&mBody)) return r->message;
    if (auto* h = std::get_if<HandledFault>(&mBody)) return h->message;
    throw std::logic_error("reply has no message");
}

const CrashInfo& Reply::crash() const {
    if (auto* c = std::get_if<CrashInfo>(&mBody)) return *c;
    throw std::logic_error("reply is not a crash");
}

// ---------------------------------------------------------------------------
// Faults and frames

ServiceFault::ServiceFault(CrashInfo info) : mInfo(std::move(info)) {
    mWhat = std::string(to_string(mInfo.kind));
    if (!mInfo.stackFrames.empty()) mWhat += " at " + mInfo.stackFrames.front();
    if (!mInfo.detail.empty()) mWhat += ": " + mInfo.detail;
}

void CallStack::push(std::string_view label) {
    if (mFrames.size() >= mLimit) {
        CrashInfo info;
        info.kind = ExceptionKind::StackOverflow;
        info.stackFrames.reserve(mFrames.size() + 1);
        info.stackFrames.emplace_back(label);
        for (auto it = mFrames.rbegin(); it != mFrames.rend(); ++it) {
            info.stackFrames.push_back(*it);
        }
        info.detail = "simulated stack limit of " + std::to_string(mLimit) + " frames";
        throw ServiceFault(std::move(info));
    }
    mFrames.emplace_back(label);
}

void CallStack::pop() {
    if (!mFrames.empty()) mFrames.pop_back();
}

std::vector<std::string> CallStack::snapshot() const {
    return {mFrames.rbegin(), mFrames.rend()};
}

void CallStack::noteUnwind() {
    if (!mUnwound) mUnwound = snapshot();
}

std::optional<std::vector<std::string>> CallStack::takeUnwindSnapshot() {
    auto out = std::move(mUnwound);
    mUnwound.reset();
    return out;
}

void DispatchContext::crash(ExceptionKind kind, std::string_view site, std::string detail,
                            Severity severity) {
    CrashInfo info;
    info.kind = kind;
    info.stackFrames.emplace_back(site);
    for (auto& f : mStack.snapshot()) info.stackFrames.push_back(std::move(f));
    info.detail = std::move(detail);
    info.severity = severity;
    throw ServiceFault(std::move(info));
}

ScopedFrame::ScopedFrame(DispatchContext& ctx, std::string_view label)
      : mStack(ctx.stack()), mUncaught(std::uncaught_exceptions()) {
    mStack.push(label);
}

ScopedFrame::~ScopedFrame() {
    if (std::uncaught_exceptions() > mUncaught) mStack.noteUnwind();
    mStack.pop();
}

// ---------------------------------------------------------------------------
// Service manager

namespace {

class ServiceManager : public Service {
public:
    explicit ServiceManager(Router& router) : mRouter(router) {}

    Reply onTransact(MethodCode code, Parcel& data, DispatchContext&) override {
        if (code != kGetServiceCode) return Reply::rejected("unknown transaction code");
        std::string descriptor;
        try {
            descriptor = data.readString("descriptor");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad descriptor: ") + e.what());
        }
        auto handle = mRouter.getService(descriptor);
        if (!handle) return Reply::rejected("no such service: " + descriptor);
        Parcel reply;
        reply.writeHandle(*handle);
        return Reply::ok(std::move(reply));
    }

private:
    Router& mRouter;
};

}  // namespace

// ---------------------------------------------------------------------------
// Router

Router::Router() {
    Entry manager;
    manager.descriptor = std::string(kServiceManagerDescriptor);
    manager.factory = [this] { return std::make_unique<ServiceManager>(*this); };
    manager.instance = manager.factory();
    mByDescriptor.emplace(manager.descriptor, 0);
    mEntries.emplace(0, std::move(manager));
}

Handle Router::registerService(std::string descriptor, ServiceFactory factory) {
    if (!factory) throw RegistrationError("missing service factory");
    if (!descriptor.empty() && mByDescriptor.contains(descriptor)) {
        throw RegistrationError("descriptor already registered: " + descriptor);
    }
    const int32_t handle = mNextHandle++;
    Entry entry;
    entry.descriptor = std::move(descriptor);
    entry.factory = std::move(factory);
    entry.instance = entry.factory();
    if (!entry.descriptor.empty()) mByDescriptor.emplace(entry.descriptor, handle);
    mEntries.emplace(handle, std::move(entry));
    return Handle{handle};
}

std::optional<Handle> Router::getService(std::string_view descriptor) const {
    if (descriptor.empty()) return std::nullopt;
    auto it = mByDescriptor.find(descriptor);
    if (it == mByDescriptor.end()) return std::nullopt;
    return Handle{it->second};
}

bool Router::isLive(Handle h) const {
    return mEntries.contains(h.value);
}

Service* Router::lookup(Handle h) {
    auto it = mEntries.find(h.value);
    return it == mEntries.end() ? nullptr : it->second.instance.get();
}

std::optional<std::string> Router::descriptorOf(Handle h) const {
    auto it = mEntries.find(h.value);
    if (it == mEntries.end()) return std::nullopt;
    return it->second.descriptor;
}

std::vector<std::pair<Handle, std::string>> Router::namedServices() const {
    std::vector<std::pair<Handle, std::string>> out;
    for (const auto& [h, e] : mEntries) {
        if (!e.descriptor.empty()) out.emplace_back(Handle{h}, e.descriptor);
    }
    return out;
}

std::vector<Handle> Router::liveHandles() const {
    std::vector<Handle> out;
    out.reserve(mEntries.size());
    for (const auto& [h, e] : mEntries) out.emplace_back(h);
    return out;
}

void Router::resetService(Handle h) {
    auto it = mEntries.find(h.value);
    if (it == mEntries.end()) throw std::out_of_range("no such handle");
    it->second.instance = it->second.factory();
}

void Router::resetAll() {
    for (auto& [h, e] : mEntries) e.instance = e.factory();
}

Reply Router::transact(Transaction txn) {
    auto it = mEntries.find(txn.target.value);
    IpcEdge edge;
    edge.seq = mNextSeq++;
    edge.sender = txn.sender;
    edge.descriptor = it == mEntries.end() ? std::string() : it->second.descriptor;
    edge.code = txn.code;
    mEdges.push_back(edge);

    txn.data.setPosition(0);
    ParcelObserver* parcelObserver = nullptr;
    if (mObserver) parcelObserver = mObserver->beginDispatch(txn, edge.descriptor);

    auto finish = [&](Reply reply) {
        txn.data.setObserver(nullptr);
        if (mObserver) mObserver->endDispatch(txn, reply);
        return reply;
    };

    if (it == mEntries.end()) return finish(Reply::rejected("no such handle"));

    // Dispatch may register new objects; map nodes stay put.
    Entry& entry = it->second;
    txn.data.setObserver(parcelObserver);

    CallStack stack;
    DispatchContext ctx(*this, stack, txn.sender);
    std::optional<CrashInfo> crash;
    std::optional<Reply> reply;
    try {
        reply.emplace(entry.instance->onTransact(txn.code, txn.data, ctx));
    } catch (const ServiceFault& fault) {
        crash = fault.info();
    } catch (const ParcelError& e) {
        CrashInfo info;
        info.kind = ExceptionKind::MalformedParcel;
        info.stackFrames = stack.takeUnwindSnapshot().value_or(std::vector<std::string>{});
        info.detail = e.what();
        crash = std::move(info);
    } catch (const std::exception& e) {
        CrashInfo info;
        info.kind = ExceptionKind::UncaughtException;
        info.stackFrames = stack.takeUnwindSnapshot().value_or(std::vector<std::string>{});
        info.detail = e.what();
        crash = std::move(info);
    }

    if (crash) {
        if (crash->stackFrames.empty()) crash->stackFrames.push_back(entry.descriptor + ".dispatch");
        entry.instance = entry.factory();
        return finish(Reply::fatalCrash(std::move(*crash)));
    }
    return finish(std::move(*reply));
}

std::string Router::edgesAsJsonLines() const {
    std::ostringstream out;
    for (const auto& e : mEdges) {
        nlohmann::json j = {
                {"seq", e.seq}, {"sender", e.sender}, {"descriptor", e.descriptor}, {"code", e.code}};
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace ipcfuzz
