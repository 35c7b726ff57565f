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

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ipcfuzz/services.hpp"

namespace ipcfuzz::services {
namespace {

class ServicesTest : public ::testing::Test {
protected:
    void SetUp() override { router = make_target_router(); }

    Reply send(std::string_view descriptor, MethodCode code, Parcel data = {}) {
        return router->transact({*router->getService(descriptor), code, std::move(data), 0, "test"});
    }

    std::unique_ptr<Router> router;
};

Parcel graphics_parcel(int32_t numFds, int32_t numInts) {
    Parcel p;
    p.writeString("surface");
    p.writeInt32(numFds);
    p.writeInt32(numInts);
    return p;
}

// Independent model of the allocation: header plus one 4-byte slot per fd
// and int, reduced modulo 2^32.
uint32_t wrapped_alloc_oracle(int32_t numFds, int32_t numInts) {
    const uint64_t a = static_cast<uint32_t>(numFds);
    const uint64_t b = static_cast<uint32_t>(numInts);
    return static_cast<uint32_t>((12 + 4 * a + 4 * b) % (uint64_t{1} << 32));
}

TEST(RegistryTest, CodesAreContiguousFromOne) {
    size_t total = 0;
    for (const auto& reg : registries()) {
        for (size_t i = 0; i < reg.methods.size(); ++i) {
            EXPECT_EQ(reg.methods[i].code, i + 1) << reg.descriptor;
        }
        total += reg.methods.size();
    }
    EXPECT_EQ(registries().size(), 6u);
    EXPECT_EQ(total, 13u);
    const auto* audio = find_registry(kAudio);
    ASSERT_NE(audio, nullptr);
    EXPECT_TRUE(audio->methods[audio::kRegisterClient - 1].hidden);
    EXPECT_EQ(find_registry("svc.nope"), nullptr);
}

TEST(RegistryTest, ManifestHasBetweenSevenAndTenBugs) {
    const auto& bugs = seeded_bugs();
    EXPECT_GE(bugs.size(), 7u);
    EXPECT_LE(bugs.size(), 10u);
    std::set<std::string> descriptors;
    for (const auto& b : bugs) {
        descriptors.insert(b.descriptor);
        EXPECT_FALSE(b.topFrames.empty());
        EXPECT_LE(b.topFrames.size(), 5u);
    }
    EXPECT_EQ(descriptors.size(), 5u);
    EXPECT_FALSE(descriptors.contains(std::string(kQueue)));
}

TEST_F(ServicesTest, RegistrationOrderFixesHandles) {
    EXPECT_EQ(router->getService(kQueue), Handle{1});
    EXPECT_EQ(router->getService(kActivity), Handle{6});
}

// ---------------------------------------------------------------------------
// Queue

TEST_F(ServicesTest, QueueAddReturnsTrue) {
    Parcel p;
    p.writeString("a");
    Reply r = send(kQueue, queue::kAdd, std::move(p));
    ASSERT_TRUE(r.isOk());
    EXPECT_TRUE(r.payload().readBool());
}

TEST_F(ServicesTest, QueueEmptyCasesAreRejected) {
    for (MethodCode code : {queue::kPeek, queue::kPoll, queue::kRemove}) {
        Reply r = send(kQueue, code);
        ASSERT_EQ(r.kind(), ReplyKind::Rejected);
        EXPECT_EQ(r.message(), "empty queue");
    }
}

TEST_F(ServicesTest, QueueOversizedNameIsHandledFault) {
    Parcel p;
    p.writeString(std::string(queue::kMaxNameBytes + 1, 'x'));
    EXPECT_EQ(send(kQueue, queue::kAdd, std::move(p)).kind(), ReplyKind::HandledFault);
}

TEST_F(ServicesTest, QueueTruncationSweepNeverCrashes) {
    Parcel full;
    full.writeString("a queue entry");
    const auto bytes = std::vector<uint8_t>(full.data().begin(), full.data().end());
    for (size_t n = 0; n < bytes.size(); ++n) {
        Parcel cut = Parcel::fromBytes({bytes.begin(), bytes.begin() + n});
        EXPECT_EQ(send(kQueue, queue::kAdd, std::move(cut)).kind(), ReplyKind::Rejected) << n;
    }
}

TEST_F(ServicesTest, QueueSurvivesRandomParcels) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100000; ++i) {
        std::vector<uint8_t> bytes(rng() % 48);
        for (auto& b : bytes) b = static_cast<uint8_t>(rng());
        const MethodCode code = static_cast<MethodCode>(rng() % 6);
        Reply r = send(kQueue, code, Parcel::fromBytes(std::move(bytes)));
        ASSERT_NE(r.kind(), ReplyKind::FatalCrash) << "iteration " << i;
    }
}

TEST_F(ServicesTest, QueueClientRoundTrip) {
    QueueClient q(*router, "app");
    EXPECT_TRUE(q.add("a"));
    EXPECT_TRUE(q.add("b"));
    EXPECT_EQ(q.peek(), "a");
    EXPECT_EQ(q.poll(), "a");
    EXPECT_EQ(q.remove(), "b");
    EXPECT_EQ(q.remove(), std::nullopt);
}

// ---------------------------------------------------------------------------
// Audio

TEST_F(ServicesTest, AudioHiddenMethodCrashesOnEmptyParcel) {
    Reply r = send(kAudio, audio::kRegisterClient);
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::NullDeref);
    EXPECT_EQ(r.crash().stackFrames.front(), "audio.registerClient.use_callback");
}

TEST_F(ServicesTest, AudioHiddenMethodAcceptsLiveCallback) {
    Parcel create;
    create.writeString("s");
    Reply session = send(kAudio, audio::kCreateSession, std::move(create));
    ASSERT_TRUE(session.isOk());
    Parcel p;
    p.writeHandle(session.payload().readHandle().handle);
    p.writeString("cb");
    EXPECT_EQ(send(kAudio, audio::kRegisterClient, std::move(p)).kind(), ReplyKind::Ok);
}

TEST_F(ServicesTest, AudioPlayValidatesTrack) {
    Parcel p;
    p.writeString("track");
    EXPECT_EQ(send(kAudio, audio::kPlay, std::move(p)).kind(), ReplyKind::Ok);
    EXPECT_EQ(send(kAudio, audio::kPlay).kind(), ReplyKind::Rejected);
}

TEST_F(ServicesTest, AudioStartSessionNeedsLiveSessionSlot) {
    AudioClient a(*router, "app");
    Handle s = a.openSession("alpha");
    EXPECT_NO_THROW(a.startSession(s));
    Parcel tampered;
    tampered.writeInt32(s.value);  // same bytes, no offsets entry
    EXPECT_EQ(send(kAudio, audio::kStartSession, std::move(tampered)).kind(), ReplyKind::Rejected);
    EXPECT_THROW(a.startSession(Handle{1}), RemoteError);
}

// ---------------------------------------------------------------------------
// Bluetooth

TEST_F(ServicesTest, BluetoothWrapperRefusesWithoutSending) {
    BluetoothClient b(*router, "app");
    const size_t before = router->edges().size();
    std::vector<std::string> names(20, "n");
    EXPECT_THROW(b.registerAppConfiguration(20, names), ClientError);
    EXPECT_THROW(b.registerAppConfiguration(2, {"a"}), ClientError);
    EXPECT_EQ(router->edges().size(), before);
    EXPECT_NO_THROW(b.registerAppConfiguration(3, {"a", "b", "c"}));
    EXPECT_EQ(b.state(), bluetooth::kStateOn);
}

TEST_F(ServicesTest, BluetoothDirectOverflowCrashes) {
    Parcel p;
    p.writeInt32(20);
    for (int i = 0; i < 20; ++i) p.writeString("n");
    Reply r = send(kBluetooth, bluetooth::kRegisterAppConfiguration, std::move(p));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::OutOfBounds);
}

TEST_F(ServicesTest, BluetoothShortListCrashes) {
    Parcel p;
    p.writeInt32(3);
    p.writeString("a");
    Reply r = send(kBluetooth, bluetooth::kRegisterAppConfiguration, std::move(p));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::MalformedParcel);
    EXPECT_EQ(r.crash().stackFrames.front(), "bluetooth.registerAppConfiguration.read_entries");
}

TEST_F(ServicesTest, BluetoothDirectValidListIsOk) {
    Parcel p;
    p.writeInt32(3);
    for (auto s : {"a", "b", "c"}) p.writeString(s);
    EXPECT_EQ(send(kBluetooth, bluetooth::kRegisterAppConfiguration, std::move(p)).kind(), ReplyKind::Ok);
}

// ---------------------------------------------------------------------------
// View

Parcel view_chain(size_t depth) {
    Parcel p;
    p.writeString("pkg");
    for (size_t i = 0; i < depth; ++i) p.writeInt32(view::kModeSplit);
    return p;
}

TEST_F(ServicesTest, ViewLeafIsOk) {
    Parcel p;
    p.writeString("pkg");
    p.writeInt32(view::kModeNormal);
    p.writeString("leaf");
    Reply r = send(kView, view::kSetRemoteViews, std::move(p));
    ASSERT_TRUE(r.isOk());
    EXPECT_EQ(r.payload().readInt32(), 1);
}

TEST_F(ServicesTest, ViewDeepChainOverflows) {
    Reply r = send(kView, view::kSetRemoteViews, view_chain(600));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::StackOverflow);
    for (size_t i = 0; i < 5; ++i) EXPECT_EQ(r.crash().stackFrames[i], "view.RemoteViews.unparcel");
}

TEST_F(ServicesTest, ViewShallowTruncationIsMalformed) {
    Reply r = send(kView, view::kSetRemoteViews, view_chain(10));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::MalformedParcel);
    EXPECT_EQ(r.crash().stackFrames.front(), "view.setRemoteViews.unparcel_failed");
}

TEST_F(ServicesTest, ViewClientDepthTwoIsOkAndDepthIsBounded) {
    ViewClient v(*router, "app");
    auto tree = RemoteViewPayload::split(RemoteViewPayload::leaf("a"), RemoteViewPayload::leaf("b"));
    EXPECT_EQ(tree.depth(), 2u);
    EXPECT_EQ(v.setRemoteViews("pkg", tree), 3);

    RemoteViewPayload deep = RemoteViewPayload::leaf("x");
    for (int i = 0; i < 20; ++i) deep = RemoteViewPayload::split(deep, RemoteViewPayload::leaf("y"));
    EXPECT_THROW(v.setRemoteViews("pkg", deep), ClientError);
}

// ---------------------------------------------------------------------------
// Graphics

TEST(GraphicsOracle, WrapArithmetic) {
    EXPECT_EQ(wrapped_alloc_oracle(2, 3), 32u);
    EXPECT_EQ(wrapped_alloc_oracle(0, 0), 12u);
    EXPECT_EQ(wrapped_alloc_oracle(1, 0x7FFFFFFF), 12u);
}

TEST_F(ServicesTest, GraphicsAllocationMatchesOracle) {
    for (auto [fds, ints] : std::vector<std::pair<int32_t, int32_t>>{{2, 3}, {0, 0}, {100, 7}}) {
        Reply r = send(kGraphics, graphics::kCreateNativeHandle, graphics_parcel(fds, ints));
        ASSERT_TRUE(r.isOk());
        EXPECT_EQ(static_cast<uint32_t>(r.payload().readInt32()), wrapped_alloc_oracle(fds, ints));
    }
}

TEST_F(ServicesTest, GraphicsWrapCorruptsMemory) {
    Reply r = send(kGraphics, graphics::kCreateNativeHandle, graphics_parcel(1, 0x7FFFFFFF));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::MemoryCorruption);
    EXPECT_EQ(r.crash().severity, Severity::Critical);
    EXPECT_NE(r.crash().detail.find(std::to_string(wrapped_alloc_oracle(1, 0x7FFFFFFF)) + "-byte"),
              std::string::npos);
}

TEST_F(ServicesTest, GraphicsWrapperBoundsCounts) {
    GraphicsClient g(*router, "app");
    EXPECT_EQ(g.createNativeHandle("surface", 2, 3), 32u);
    EXPECT_THROW(g.createNativeHandle("surface", -1, 0), ClientError);
    EXPECT_THROW(g.createNativeHandle("surface", 0, 5000), ClientError);
}

// ---------------------------------------------------------------------------
// Activity

Parcel intent_parcel(const Bundle& extras) {
    Parcel p;
    write_intent(p, {"act", "uri", extras});
    return p;
}

TEST_F(ServicesTest, ActivityWellFormedIntentIsOk) {
    Bundle extras;
    extras.entries.push_back({"k", int32_t{7}});
    EXPECT_EQ(send(kActivity, activity::kStartActivity, intent_parcel(extras)).kind(), ReplyKind::Ok);
}

TEST_F(ServicesTest, ActivityBadTagHitsTagSwitch) {
    Bundle extras;
    extras.entries.push_back({"k", int32_t{7}});
    Parcel p = intent_parcel(extras);
    // action(8) + uri(8) + count(4) + key "k"(8) puts the tag at 28.
    p.patchInt32(28, 9);
    Reply r = send(kActivity, activity::kStartActivity, std::move(p));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().kind, ExceptionKind::MalformedParcel);
    EXPECT_EQ(r.crash().stackFrames.front(), "activity.Bundle.tag_switch");
}

TEST_F(ServicesTest, ActivityShortBundleHitsEntryLoop) {
    Bundle extras;
    extras.entries.push_back({"k", int32_t{7}});
    Parcel p = intent_parcel(extras);
    p.patchInt32(16, 5);
    Reply r = send(kActivity, activity::kStartActivity, std::move(p));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().stackFrames.front(), "activity.Bundle.entry_loop");
}

TEST_F(ServicesTest, ActivityNegativeBytesLengthHitsReadBytes) {
    Bundle extras;
    extras.entries.push_back({"b", std::vector<uint8_t>{1, 2, 3}});
    Parcel p = intent_parcel(extras);
    p.patchInt32(32, -1);
    Reply r = send(kActivity, activity::kStartActivity, std::move(p));
    ASSERT_EQ(r.kind(), ReplyKind::FatalCrash);
    EXPECT_EQ(r.crash().stackFrames.front(), "activity.Bundle.read_bytes");
}

TEST_F(ServicesTest, ActivityDistinctSitesShareTheUpperFrames) {
    Bundle extras;
    extras.entries.push_back({"k", int32_t{7}});
    Parcel a = intent_parcel(extras);
    a.patchInt32(28, 0);
    Parcel b = intent_parcel(extras);
    b.patchInt32(16, 2);
    const auto fa = send(kActivity, activity::kStartActivity, std::move(a)).crash().stackFrames;
    const auto fb = send(kActivity, activity::kStartActivity, std::move(b)).crash().stackFrames;
    EXPECT_NE(fa.front(), fb.front());
    EXPECT_EQ(std::vector<std::string>(fa.begin() + 1, fa.end()),
              std::vector<std::string>(fb.begin() + 1, fb.end()));
}

TEST_F(ServicesTest, ActivityNestedBundleIsOk) {
    Bundle inner;
    inner.entries.push_back({"x", std::string("y")});
    Bundle extras;
    extras.entries.push_back({"n", inner});
    extras.entries.push_back({"d", 2.5});
    extras.entries.push_back({"l", int64_t{-9}});
    ActivityClient a(*router, "app");
    EXPECT_EQ(a.startActivity({"act", "uri", extras}), 3);
}

TEST(PayloadTest, BundleWriterBoundsNesting) {
    Bundle b;
    for (int i = 0; i < 70; ++i) {
        Bundle outer;
        outer.entries.push_back({"n", b});
        b = outer;
    }
    Parcel p;
    EXPECT_THROW(write_bundle(p, b), ClientError);
}

// ---------------------------------------------------------------------------

TEST_F(ServicesTest, WrapperHappyPathsReturnOk) {
    QueueClient q(*router, "app");
    EXPECT_TRUE(q.add("x"));
    AudioClient a(*router, "app");
    EXPECT_NO_THROW(a.play("track"));
    EXPECT_NO_THROW(a.startSession(a.openSession("s")));
    BluetoothClient b(*router, "app");
    EXPECT_NO_THROW(b.registerAppConfiguration(1, {"a"}));
    ViewClient v(*router, "app");
    EXPECT_EQ(v.setRemoteViews("p", RemoteViewPayload::leaf("t")), 1);
    GraphicsClient g(*router, "app");
    EXPECT_EQ(g.createNativeHandle("c", 0, 0), 12u);
    ActivityClient act(*router, "app");
    EXPECT_EQ(act.startActivity({"a", "u", {}}), 0);
    for (const auto& e : router->edges()) EXPECT_EQ(e.sender, "app");
}

}  // namespace
}  // namespace ipcfuzz::services
