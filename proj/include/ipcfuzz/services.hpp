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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ipcfuzz/parcel.hpp"
#include "ipcfuzz/router.hpp"

// Target corpus: six services with AIDL-style registries and client-side
// wrappers. Five carry a seeded server-side trust bug; the queue service is
// the robust control.
namespace ipcfuzz::services {

inline constexpr std::string_view kQueue = "svc.queue";
inline constexpr std::string_view kAudio = "svc.audio";
inline constexpr std::string_view kBluetooth = "svc.bluetooth";
inline constexpr std::string_view kView = "svc.view";
inline constexpr std::string_view kGraphics = "svc.graphics";
inline constexpr std::string_view kActivity = "svc.activity";

namespace queue {
inline constexpr MethodCode kAdd = 1;
inline constexpr MethodCode kPeek = 2;
inline constexpr MethodCode kPoll = 3;
inline constexpr MethodCode kRemove = 4;
inline constexpr size_t kMaxNameBytes = 4096;
inline constexpr size_t kCapacity = 64;
}  // namespace queue

namespace audio {
inline constexpr MethodCode kPlay = 1;
inline constexpr MethodCode kRegisterClient = 2;  // hidden: no public wrapper
inline constexpr MethodCode kCreateSession = 3;
inline constexpr MethodCode kStartSession = 4;
}  // namespace audio

namespace bluetooth {
inline constexpr MethodCode kRegisterAppConfiguration = 1;
inline constexpr MethodCode kGetState = 2;
inline constexpr int32_t kSlotCount = 16;
inline constexpr int32_t kStateOn = 12;
}  // namespace bluetooth

namespace view {
inline constexpr MethodCode kSetRemoteViews = 1;
inline constexpr int32_t kModeNormal = 0;
inline constexpr int32_t kModeSplit = 1;
inline constexpr size_t kMaxWriterDepth = 16;
}  // namespace view

namespace graphics {
inline constexpr MethodCode kCreateNativeHandle = 1;
inline constexpr uint32_t kHeaderBytes = 12;  // version, numFds, numInts
inline constexpr int32_t kClientMaxSlots = 1024;
}  // namespace graphics

namespace activity {
inline constexpr MethodCode kStartActivity = 1;
inline constexpr size_t kMaxWriterDepth = 64;
}  // namespace activity

// ---------------------------------------------------------------------------
// Registries and the seeded-bug manifest

struct MethodInfo {
    MethodCode code;
    std::string name;
    std::vector<std::string> signature;
    bool hidden = false;  // present in the registry, absent from the client wrapper
};

struct MethodRegistry {
    std::string descriptor;
    std::vector<MethodInfo> methods;
};

struct SeededBug {
    std::string id;
    std::string descriptor;
    MethodCode code;
    std::string trigger;
    ExceptionKind kind;
    // Top-of-stack frames the crash is expected to carry (innermost first).
    std::vector<std::string> topFrames;
    // Whether blind (empty/random) transactions can reach the site, and why.
    bool blindReachable;
    std::string reachability;
};

// The six target registries in registration order.
const std::vector<MethodRegistry>& registries();
const MethodRegistry* find_registry(std::string_view descriptor);
const std::vector<SeededBug>& seeded_bugs();

// Registers the six services in registration order (handles 1..6).
void register_all(Router& router);
std::unique_ptr<Router> make_target_router();

// ---------------------------------------------------------------------------
// Payload types

enum class BundleTag : int32_t {
    I32 = 1,
    I64 = 2,
    F64 = 3,
    String = 4,
    Bytes = 5,
    Bundle = 6,
    Handle = 7,
};

inline constexpr int32_t kMinBundleTag = 1;
inline constexpr int32_t kMaxBundleTag = 7;

struct BundleEntry;

struct Bundle {
    std::vector<BundleEntry> entries;
};

using BundleValue = std::variant<int32_t, int64_t, double, std::string, std::vector<uint8_t>,
                                 Bundle, Handle>;

struct BundleEntry {
    std::string key;
    BundleValue value;
};

BundleTag tag_of(const BundleValue& value);

struct IntentPayload {
    std::string action;
    std::string dataUri;
    Bundle extras;
};

struct RemoteViewPayload {
    int32_t mode = view::kModeNormal;
    std::string text;                          // mode == kModeNormal
    std::vector<RemoteViewPayload> children;   // exactly two otherwise

    static RemoteViewPayload leaf(std::string text);
    static RemoteViewPayload split(RemoteViewPayload first, RemoteViewPayload second);
    size_t depth() const;
};

// Writer-side encoders. They enforce the well-formedness rules the server
// decoders deliberately skip.
void write_bundle(Parcel& parcel, const Bundle& bundle);
void write_intent(Parcel& parcel, const IntentPayload& intent);
void write_remote_views(Parcel& parcel, const RemoteViewPayload& views);

// ---------------------------------------------------------------------------
// Client wrappers

// Thrown by a wrapper that refuses its arguments; no transaction is sent.
class ClientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown by a wrapper when the server answers with a non-OK reply it cannot
// represent.
class RemoteError : public std::runtime_error {
public:
    RemoteError(ReplyKind kind, const std::string& what)
          : std::runtime_error(what), mKind(kind) {}
    ReplyKind kind() const { return mKind; }

private:
    ReplyKind mKind;
};

class ClientBase {
public:
    ClientBase(Router& router, std::string sender, std::string_view descriptor);

    Handle handle() const { return mHandle; }
    const std::string& sender() const { return mSender; }

protected:
    static Parcel newParcel();
    Reply call(MethodCode code, Parcel data);
    Reply callChecked(MethodCode code, Parcel data);

    Router& mRouter;
    std::string mSender;
    Handle mHandle;
};

// Resolves a descriptor through a GET_SERVICE transaction on handle 0.
Handle get_service(Router& router, const std::string& sender, std::string_view descriptor);

class QueueClient : public ClientBase {
public:
    QueueClient(Router& router, std::string sender);
    bool add(std::string_view name);
    std::optional<std::string> peek();
    std::optional<std::string> poll();
    std::optional<std::string> remove();
};

class AudioClient : public ClientBase {
public:
    AudioClient(Router& router, std::string sender);
    void play(std::string_view track);
    // Creates a session object and, as the middleware does, registers it as
    // the client callback through the hidden method.
    Handle openSession(std::string_view name);
    void startSession(Handle session);
};

class BluetoothClient : public ClientBase {
public:
    BluetoothClient(Router& router, std::string sender);
    void registerAppConfiguration(int32_t count, const std::vector<std::string>& names);
    int32_t state();
};

class ViewClient : public ClientBase {
public:
    ViewClient(Router& router, std::string sender);
    int32_t setRemoteViews(std::string_view package, const RemoteViewPayload& views);
};

class GraphicsClient : public ClientBase {
public:
    GraphicsClient(Router& router, std::string sender);
    uint32_t createNativeHandle(std::string_view consumer, int32_t numFds, int32_t numInts);
};

class ActivityClient : public ClientBase {
public:
    ActivityClient(Router& router, std::string sender);
    int32_t startActivity(const IntentPayload& intent);
};

}  // namespace ipcfuzz::services
