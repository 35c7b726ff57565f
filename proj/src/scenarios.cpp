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

#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/services.hpp"

namespace ipcfuzz {

namespace {

using namespace services;

std::string note_text() {
    static const std::string kLine = "Meeting notes: ship the parcel fuzzer before the freeze. ";
    std::string text;
    while (text.size() < 2400) text += kLine;
    return text;
}

void run_queue(Router& router) {
    QueueClient q(router, "com.example.tasks");
    q.add("a");
    q.add("b");
    q.peek();
    q.poll();
    q.remove();
}

void run_callback(Router& router) {
    AudioClient a(router, "com.example.player");
    a.play("track-01");
    a.openSession("alpha");
    Handle beta = a.openSession("beta");
    a.startSession(beta);
}

void run_bluetooth(Router& router) {
    BluetoothClient b(router, "com.example.headset");
    b.registerAppConfiguration(3, {"a", "b", "c"});
    b.state();
}

void run_view(Router& router) {
    ViewClient v(router, "com.example.notes");
    auto tree = RemoteViewPayload::split(
            RemoteViewPayload::leaf("title"),
            RemoteViewPayload::split(RemoteViewPayload::leaf(note_text()),
                                     RemoteViewPayload::leaf("footer")));
    v.setRemoteViews("com.example.notes", tree);
}

void run_graphics(Router& router) {
    GraphicsClient g(router, "com.example.camera");
    g.createNativeHandle("surface", 2, 3);
}

void run_activity(Router& router) {
    ActivityClient a(router, "com.example.launcher");
    IntentPayload intent;
    intent.action = "android.intent.action.VIEW";
    intent.dataUri = "content://notes/1";
    intent.extras.entries = {
            {"count", int32_t{7}},
            {"stamp", int64_t{1700000000000}},
            {"ratio", 0.5},
            {"title", std::string("hello")},
            {"blob", std::vector<uint8_t>{1, 2, 3, 4, 5}},
    };
    a.startActivity(intent);
}

void run_all(Router& router) {
    run_queue(router);
    run_callback(router);
    run_bluetooth(router);
    run_view(router);
    run_graphics(router);
    run_activity(router);
}

}  // namespace

const std::vector<NamedScenario>& scenarios() {
    static const std::vector<NamedScenario> kScenarios = {
            {"queue", "add, peek, poll and remove on the queue service", run_queue},
            {"callback", "play a track, open two audio sessions, start the second", run_callback},
            {"bluetooth", "register three app configurations and query the state", run_bluetooth},
            {"view", "push a nested remote-view hierarchy with a long text node", run_view},
            {"graphics", "allocate a native handle with 2 fds and 3 ints", run_graphics},
            {"activity", "start an activity with a five-entry extras bundle", run_activity},
            {"all", "every scenario above, in order", run_all},
    };
    return kScenarios;
}

const NamedScenario* find_scenario(std::string_view name) {
    for (const auto& s : scenarios()) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

}  // namespace ipcfuzz
