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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ipcfuzz/parcel.hpp"

namespace ipcfuzz {

using MethodCode = uint32_t;

// The service manager answers this code on handle 0.
inline constexpr MethodCode kGetServiceCode = 1;
inline constexpr std::string_view kServiceManagerDescriptor = "svc.manager";

// Simulated stack depth at which a push raises STACK_OVERFLOW.
inline constexpr size_t kStackLimit = 512;

enum class ReplyKind { Ok, Rejected, HandledFault, FatalCrash };

std::string_view to_string(ReplyKind kind);
std::optional<ReplyKind> reply_kind_from_string(std::string_view name);

enum class ExceptionKind {
    NullDeref,
    StackOverflow,
    OutOfBounds,
    MalformedParcel,
    MemoryCorruption,
    UncaughtException,
};

std::string_view to_string(ExceptionKind kind);
std::optional<ExceptionKind> exception_kind_from_string(std::string_view name);

enum class Severity { Normal, Critical };

std::string_view to_string(Severity severity);

struct CrashInfo {
    ExceptionKind kind = ExceptionKind::UncaughtException;
    // Innermost frame first.
    std::vector<std::string> stackFrames;
    std::string detail;
    Severity severity = Severity::Normal;
};

class Reply {
public:
    static Reply ok(Parcel payload = {});
    static Reply rejected(std::string message);
    static Reply handledFault(std::string message);
    static Reply fatalCrash(CrashInfo crash);

    ReplyKind kind() const;
    bool isOk() const { return kind() == ReplyKind::Ok; }

    // Each accessor throws std::logic_error for the wrong variant.
    const Parcel& payload() const;
    Parcel& payload();
    const std::string& message() const;
    const CrashInfo& crash() const;

private:
    struct Rejected {
        std::string message;
    };
    struct HandledFault {
        std::string message;
    };
    using Body = std::variant<Parcel, Rejected, HandledFault, CrashInfo>;

    explicit Reply(Body body) : mBody(std::move(body)) {}

    Body mBody;
};

struct Transaction {
    Handle target;
    MethodCode code = 0;
    Parcel data;
    uint32_t flags = 0;
    std::string sender;
};

struct IpcEdge {
    uint64_t seq = 0;
    std::string sender;
    std::string descriptor;
    MethodCode code = 0;

    bool operator==(const IpcEdge&) const = default;
};

// Thrown by service code for a fatal fault; carries the frames captured at
// the raise site.
class ServiceFault : public std::exception {
public:
    explicit ServiceFault(CrashInfo info);
    const char* what() const noexcept override { return mWhat.c_str(); }
    const CrashInfo& info() const { return mInfo; }

private:
    CrashInfo mInfo;
    std::string mWhat;
};

// Labeled simulated call stack for one dispatch.
class CallStack {
public:
    explicit CallStack(size_t limit = kStackLimit) : mLimit(limit) {}

    void push(std::string_view label);
    void pop();
    size_t depth() const { return mFrames.size(); }

    // Innermost frame first.
    std::vector<std::string> snapshot() const;

    // Called by frames unwinding through a foreign exception; keeps the first
    // (deepest) view of the stack.
    void noteUnwind();
    std::optional<std::vector<std::string>> takeUnwindSnapshot();

private:
    size_t mLimit;
    std::vector<std::string> mFrames;
    std::optional<std::vector<std::string>> mUnwound;
};

class Router;

class DispatchContext {
public:
    DispatchContext(Router& router, CallStack& stack, std::string sender)
          : mRouter(router), mStack(stack), mSender(std::move(sender)) {}

    Router& router() { return mRouter; }
    CallStack& stack() { return mStack; }
    const std::string& sender() const { return mSender; }

    // Raises a fatal fault at `site`, which becomes the innermost frame.
    [[noreturn]] void crash(ExceptionKind kind, std::string_view site, std::string detail,
                            Severity severity = Severity::Normal);

private:
    Router& mRouter;
    CallStack& mStack;
    std::string mSender;
};

// Pushes a frame for the enclosing C++ scope.
class ScopedFrame {
public:
    ScopedFrame(DispatchContext& ctx, std::string_view label);
    ~ScopedFrame();
    ScopedFrame(const ScopedFrame&) = delete;
    ScopedFrame& operator=(const ScopedFrame&) = delete;

private:
    CallStack& mStack;
    int mUncaught;
};

class Service {
public:
    virtual ~Service() = default;
    virtual Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) = 0;
};

using ServiceFactory = std::function<std::unique_ptr<Service>()>;

// Recording hook. beginDispatch may return a parcel observer to install on
// the request for the duration of the dispatch.
class TransactionObserver {
public:
    virtual ~TransactionObserver() = default;
    virtual ParcelObserver* beginDispatch(const Transaction& txn, std::string_view descriptor) = 0;
    virtual void endDispatch(const Transaction& txn, const Reply& reply) = 0;
};

class RegistrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simulated Binder driver: handle registry, service manager on handle 0,
// fault-contained dispatch, and the IPC edge log.
class Router {
public:
    Router();
    Router(const Router&) = delete;
    Router& operator=(const Router&) = delete;

    // Named registration requires a unique descriptor; an empty descriptor
    // registers an anonymous object. Handles are never reused.
    Handle registerService(std::string descriptor, ServiceFactory factory);

    std::optional<Handle> getService(std::string_view descriptor) const;

    Reply transact(Transaction txn);

    bool isLive(Handle h) const;
    Service* lookup(Handle h);
    std::optional<std::string> descriptorOf(Handle h) const;
    // Named handles (descriptor non-empty), ascending, including handle 0.
    std::vector<std::pair<Handle, std::string>> namedServices() const;
    std::vector<Handle> liveHandles() const;

    // Replaces the instance behind `h` (or every instance) with a fresh one.
    void resetService(Handle h);
    void resetAll();

    const std::vector<IpcEdge>& edges() const { return mEdges; }
    std::string edgesAsJsonLines() const;

    void setObserver(TransactionObserver* observer) { mObserver = observer; }

private:
    struct Entry {
        std::string descriptor;
        ServiceFactory factory;
        std::unique_ptr<Service> instance;
    };

    std::map<int32_t, Entry> mEntries;
    std::map<std::string, int32_t, std::less<>> mByDescriptor;
    int32_t mNextHandle = 1;
    std::vector<IpcEdge> mEdges;
    uint64_t mNextSeq = 1;
    TransactionObserver* mObserver = nullptr;
};

}  // namespace ipcfuzz
