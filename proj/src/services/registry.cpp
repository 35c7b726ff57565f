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
#include "service_impls.hpp"

namespace ipcfuzz::services {

const std::vector<MethodRegistry>& registries() {
    static const std::vector<MethodRegistry> kRegistries = {
            {std::string(kQueue),
             {{queue::kAdd, "add", {"STRING name"}},
              {queue::kPeek, "peek", {}},
              {queue::kPoll, "poll", {}},
              {queue::kRemove, "remove", {}}}},
            {std::string(kAudio),
             {{audio::kPlay, "play", {"STRING track"}},
              {audio::kRegisterClient, "registerClient", {"HANDLE callback", "STRING name"}, true},
              {audio::kCreateSession, "createSession", {"STRING name"}},
              {audio::kStartSession, "startSession", {"HANDLE session"}}}},
            {std::string(kBluetooth),
             {{bluetooth::kRegisterAppConfiguration,
               "registerAppConfiguration",
               {"I32 count", "STRING[count] names"}},
              {bluetooth::kGetState, "getState", {}}}},
            {std::string(kView),
             {{view::kSetRemoteViews, "setRemoteViews", {"STRING package", "RemoteViews views"}}}},
            {std::string(kGraphics),
             {{graphics::kCreateNativeHandle,
               "createNativeHandle",
               {"STRING consumer", "I32 numFds", "I32 numInts"}}}},
            {std::string(kActivity),
             {{activity::kStartActivity, "startActivity", {"Intent intent"}}}},
    };
    return kRegistries;
}

const MethodRegistry* find_registry(std::string_view descriptor) {
    for (const auto& r : registries()) {
        if (r.descriptor == descriptor) return &r;
    }
    return nullptr;
}

const std::vector<SeededBug>& seeded_bugs() {
    static const std::vector<SeededBug> kBugs = {
            {"audio.hidden_register_client",
             std::string(kAudio),
             audio::kRegisterClient,
             "hidden registerClient with a null or dead callback binder (e.g. empty parcel)",
             ExceptionKind::NullDeref,
             {"audio.registerClient.use_callback", "audio.registerClient", "audio.onTransact"},
             true,
             "any parcel without a live handle in the first slot"},
            {"bluetooth.slot_overflow",
             std::string(kBluetooth),
             bluetooth::kRegisterAppConfiguration,
             "count > 16 sent past the client-side bound",
             ExceptionKind::OutOfBounds,
             {"bluetooth.registerAppConfiguration.init_slots",
              "bluetooth.registerAppConfiguration", "bluetooth.onTransact"},
             true,
             "a random leading I32 above 16 reaches it"},
            {"bluetooth.short_list",
             std::string(kBluetooth),
             bluetooth::kRegisterAppConfiguration,
             "declared count larger than the encoded string list",
             ExceptionKind::MalformedParcel,
             {"bluetooth.registerAppConfiguration.read_entries",
              "bluetooth.registerAppConfiguration", "bluetooth.onTransact"},
             false,
             "needs a leading count in 1..16, which random words hit with odds near 2^-28"},
            {"view.unbounded_recursion",
             std::string(kView),
             view::kSetRemoteViews,
             "non-normal mode chain deeper than the 512-frame stack",
             ExceptionKind::StackOverflow,
             {"view.RemoteViews.unparcel", "view.RemoteViews.unparcel",
              "view.RemoteViews.unparcel", "view.RemoteViews.unparcel",
              "view.RemoteViews.unparcel"},
             false,
             "needs a valid package string, then >512 consecutive non-zero mode words"},
            {"view.truncated_hierarchy",
             std::string(kView),
             view::kSetRemoteViews,
             "view hierarchy that ends or breaks mid-recursion",
             ExceptionKind::MalformedParcel,
             {"view.setRemoteViews.unparcel_failed", "view.setRemoteViews", "view.onTransact"},
             false,
             "needs a valid package string before any view bytes are read"},
            {"graphics.alloc_overflow",
             std::string(kGraphics),
             graphics::kCreateNativeHandle,
             "numFds + numInts large enough that 12 + 4*(numFds+numInts) wraps in 32 bits",
             ExceptionKind::MemoryCorruption,
             {"graphics.nativeHandleCreate.write_slots", "graphics.nativeHandleCreate",
              "graphics.createNativeHandle", "graphics.onTransact"},
             false,
             "needs a valid consumer string before the two counts"},
            {"activity.bundle_tag",
             std::string(kActivity),
             activity::kStartActivity,
             "Intent extras entry with a type tag outside 1..7",
             ExceptionKind::MalformedParcel,
             {"activity.Bundle.tag_switch", "activity.Bundle.unparcel",
              "activity.Intent.readFromParcel", "activity.startActivity", "activity.onTransact"},
             false,
             "needs two valid Intent header strings"},
            {"activity.bundle_count",
             std::string(kActivity),
             activity::kStartActivity,
             "Intent extras declaring more entries than are encoded",
             ExceptionKind::MalformedParcel,
             {"activity.Bundle.entry_loop", "activity.Bundle.unparcel",
              "activity.Intent.readFromParcel", "activity.startActivity", "activity.onTransact"},
             false,
             "needs two valid Intent header strings"},
            {"activity.bundle_bytes",
             std::string(kActivity),
             activity::kStartActivity,
             "BYTES extras value with a negative or oversized declared length",
             ExceptionKind::MalformedParcel,
             {"activity.Bundle.read_bytes", "activity.Bundle.unparcel",
              "activity.Intent.readFromParcel", "activity.startActivity", "activity.onTransact"},
             false,
             "needs two valid Intent header strings and a BYTES-tagged entry"},
    };
    return kBugs;
}

void register_all(Router& router) {
    router.registerService(std::string(kQueue), make_queue_service);
    router.registerService(std::string(kAudio), make_audio_service);
    router.registerService(std::string(kBluetooth), make_bluetooth_service);
    router.registerService(std::string(kView), make_view_service);
    router.registerService(std::string(kGraphics), make_graphics_service);
    router.registerService(std::string(kActivity), make_activity_service);
}

std::unique_ptr<Router> make_target_router() {
    auto router = std::make_unique<Router>();
    register_all(*router);
    return router;
}

}  // namespace ipcfuzz::services
