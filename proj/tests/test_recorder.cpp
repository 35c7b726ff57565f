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

#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/services.hpp"

namespace ipcfuzz {
namespace {

using services::AudioClient;
using services::BluetoothClient;
using services::QueueClient;

SeedRecord node(int seq, std::vector<ConsumedHandle> consumed = {}, std::vector<ProducedHandle> produced = {}) {
    SeedRecord r;
    r.seq = seq;
    r.descriptor = "svc.x";
    r.code = 1;
    r.consumedHandles = std::move(consumed);
    r.producedHandles = std::move(produced);
    return r;
}

ConsumedHandle dynamic(int32_t handle, int producer) {
    return {0, handle, producer, ""};
}

// Lexicographically least permutation that respects every edge.
std::vector<int> brute_force_order(std::vector<int> nodes, const std::vector<DependencyEdge>& edges) {
    std::sort(nodes.begin(), nodes.end());
    do {
        bool ok = true;
        for (const auto& e : edges) {
            auto p = std::find(nodes.begin(), nodes.end(), e.producer);
            auto c = std::find(nodes.begin(), nodes.end(), e.consumer);
            if (p > c) ok = false;
        }
        if (ok) return nodes;
    } while (std::next_permutation(nodes.begin(), nodes.end()));
    return {};
}

// ---------------------------------------------------------------------------
// Traces

TEST(TraceTest, BuilderNestsScopesAndCoversReads) {
    Parcel p;
    p.writeInt32(1);
    p.writeString("ab");
    p.writeInt64(3);
    TraceBuilder builder;
    p.setObserver(&builder);
    p.readInt32("a");
    {
        ParcelScope scope(p, "inner");
        p.readString("b");
        p.readInt64("c");
    }
    p.setObserver(nullptr);
    TraceNode root = builder.finish();
    ASSERT_EQ(root.children.size(), 2u);
    EXPECT_EQ(root.begin, 0u);
    EXPECT_EQ(root.end, p.data().size());
    const TraceNode& inner = root.children[1];
    EXPECT_EQ(inner.label, "inner");
    EXPECT_EQ(inner.begin, 4u);
    EXPECT_EQ(inner.end, 20u);
    EXPECT_EQ(inner.children[0], (TraceNode{FieldKind::String, "b", 4, 12, {}}));
    EXPECT_EQ(leaf_paths(root), (std::vector<FieldPath>{{0}, {1, 0}, {1, 1}}));
    EXPECT_EQ(composite_paths(root), (std::vector<FieldPath>{{1}}));
}

TEST(TraceTest, FinishClosesScopesLeftOpenByAFault) {
    Parcel p;
    p.writeInt32(2);
    TraceBuilder builder;
    p.setObserver(&builder);
    try {
        ParcelScope scope(p, "list");
        p.readInt32("n");
        p.readString("missing");
    } catch (const ParcelError&) {
    }
    TraceNode root = builder.finish();
    ASSERT_EQ(root.children.size(), 1u);
    EXPECT_EQ(root.children[0].children.size(), 1u);
    EXPECT_EQ(root.end, 4u);
}

TEST(TraceTest, PathTextRoundTrip) {
    EXPECT_EQ(to_string(FieldPath{0, 1, 2}), "0.1.2");
    EXPECT_EQ(field_path_from_string("0.1.2"), (FieldPath{0, 1, 2}));
    EXPECT_EQ(field_path_from_string(""), FieldPath{});
    TraceNode root;
    EXPECT_THROW(node_at(root, {0}), std::out_of_range);
}

// ---------------------------------------------------------------------------
// Recording

TEST(RecorderTest, QueueAddYieldsTwoRecords) {
    auto router = services::make_target_router();
    Recording rec = record_session([](Router& r) { QueueClient(r, "app").add("a"); }, *router);
    ASSERT_EQ(rec.corpus.records.size(), 2u);
    const SeedRecord& lookup = rec.corpus.records[0];
    EXPECT_EQ(lookup.descriptor, kServiceManagerDescriptor);
    EXPECT_EQ(lookup.producedHandles, (std::vector<ProducedHandle>{{1, 0}}));

    const SeedRecord& add = rec.corpus.records[1];
    EXPECT_EQ(add.seq, 2);
    EXPECT_EQ(add.descriptor, services::kQueue);
    EXPECT_EQ(add.code, services::queue::kAdd);
    EXPECT_EQ(add.payloadHex, "0100000061000000");
    ASSERT_EQ(add.trace.children.size(), 1u);
    EXPECT_EQ(add.trace.children[0].kind, FieldKind::String);
    EXPECT_EQ(add.trace.children[0].begin, 0u);
    EXPECT_EQ(add.trace.children[0].end, 8u);
    EXPECT_TRUE(add.consumedHandles.empty());
}

TEST(RecorderTest, CallbackCreatesDependencyEdge) {
    Recording rec = record_scenario("callback");
    DependencyGraph g = build_dependency_graph(rec.corpus);
    ASSERT_FALSE(g.edges.empty());
    for (const auto& e : g.edges) {
        const SeedRecord* producer = rec.corpus.find(e.producer);
        const SeedRecord* consumer = rec.corpus.find(e.consumer);
        ASSERT_NE(producer, nullptr);
        ASSERT_NE(consumer, nullptr);
        EXPECT_LT(e.producer, e.consumer);
        EXPECT_EQ(producer->producedHandles.front().handle, e.handle);
        EXPECT_EQ(consumer->consumedHandles.front().handle, e.handle);
        EXPECT_EQ(consumer->consumedHandles.front().position, 0u);
    }
    // create session N feeds the registration at N+1
    EXPECT_EQ(g.edges.front().consumer, g.edges.front().producer + 1);
}

TEST(RecorderTest, ServiceHandlesAreStaticNotEdges) {
    auto router = services::make_target_router();
    Recording rec = record_session(
            [](Router& r) {
                const Handle queue = services::get_service(r, "app", services::kQueue);
                const Handle audio = services::get_service(r, "app", services::kAudio);
                Parcel p;
                p.writeHandle(queue);
                r.transact({audio, services::audio::kStartSession, std::move(p), 0, "app"});
            },
            *router);
    ASSERT_EQ(rec.corpus.records.size(), 3u);
    const SeedRecord& start = rec.corpus.records[2];
    ASSERT_EQ(start.consumedHandles.size(), 1u);
    EXPECT_TRUE(start.consumedHandles[0].isStatic());
    EXPECT_EQ(start.consumedHandles[0].descriptor, services::kQueue);
    DependencyGraph g = build_dependency_graph(rec.corpus);
    EXPECT_TRUE(g.edges.empty());
    EXPECT_EQ(g.staticPrerequisites.at(3), std::vector<std::string>{std::string(services::kQueue)});
}

TEST(RecorderTest, IntentTraceShape) {
    Recording rec = record_scenario("activity");
    const SeedRecord& start = rec.corpus.records.back();
    ASSERT_EQ(start.trace.children.size(), 1u);
    const TraceNode& intent = start.trace.children[0];
    EXPECT_EQ(intent.label, "Intent");
    ASSERT_EQ(intent.children.size(), 3u);
    EXPECT_EQ(intent.children[0].kind, FieldKind::String);
    EXPECT_EQ(intent.children[1].kind, FieldKind::String);
    const TraceNode& bundle = intent.children[2];
    EXPECT_EQ(bundle.kind, FieldKind::Composite);
    EXPECT_EQ(bundle.children[0].kind, FieldKind::I32);
    const std::vector<FieldKind> valueKinds{FieldKind::I32, FieldKind::I64, FieldKind::F64, FieldKind::String,
                                            FieldKind::Bytes};
    ASSERT_EQ(bundle.children.size(), 1 + valueKinds.size());
    for (size_t i = 0; i < valueKinds.size(); ++i) {
        const TraceNode& entry = bundle.children[i + 1];
        EXPECT_EQ(entry.label, "Bundle.entry[" + std::to_string(i) + "]");
        ASSERT_EQ(entry.children.size(), 3u);
        EXPECT_EQ(entry.children[0].kind, FieldKind::String);
        EXPECT_EQ(entry.children[1].kind, FieldKind::I32);
        EXPECT_EQ(entry.children[2].kind, valueKinds[i]);
    }
}

TEST(RecorderTest, TraceMatchesWriterEncodingForEveryScenario) {
    for (const auto& s : scenarios()) {
        Recording rec = record_scenario(s.name);
        ASSERT_EQ(rec.writerLogs.size(), rec.corpus.records.size()) << s.name;
        for (size_t i = 0; i < rec.corpus.records.size(); ++i) {
            const SeedRecord& r = rec.corpus.records[i];
            EXPECT_EQ(leaf_sequence(r.trace), rec.writerLogs[i]) << s.name << " seq " << r.seq;
            EXPECT_EQ(r.trace.end, r.payload().data().size()) << s.name << " seq " << r.seq;
            EXPECT_EQ(r.replyKind, ReplyKind::Ok);
        }
    }
}

TEST(RecorderTest, AllScenarioSeedCount) {
    Recording rec = record_scenario("all");
    EXPECT_EQ(rec.corpus.records.size(), 22u);
    for (size_t i = 0; i < rec.corpus.records.size(); ++i) {
        EXPECT_EQ(rec.corpus.records[i].seq, static_cast<int>(i + 1));
    }
}

TEST(RecorderTest, WrapperRefusalAbortsWithPartialCorpus) {
    auto router = services::make_target_router();
    try {
        record_session(
                [](Router& r) {
                    QueueClient(r, "app").add("a");
                    BluetoothClient(r, "app").registerAppConfiguration(20, {"a"});
                },
                *router);
        FAIL() << "expected RecordingAborted";
    } catch (const RecordingAborted& e) {
        EXPECT_EQ(e.partial().corpus.records.size(), 3u);
    }
    EXPECT_THROW(record_scenario("nope"), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Dependency graph

TEST(GraphTest, ChainOrder) {
    SeedCorpus c{{node(1, {}, {{5, 0}}), node(2, {dynamic(5, 1)}, {{6, 0}}), node(3, {dynamic(6, 2)})}};
    DependencyGraph g = build_dependency_graph(c);
    EXPECT_EQ(g.edges, (std::vector<DependencyEdge>{{1, 2, 5}, {2, 3, 6}}));
    EXPECT_EQ(g.topologicalOrder(), (std::vector<int>{1, 2, 3}));
}

TEST(GraphTest, IndependentNodesAscend) {
    SeedCorpus c{{node(3), node(1), node(2)}};
    EXPECT_EQ(build_dependency_graph(c).topologicalOrder(), (std::vector<int>{1, 2, 3}));
}

TEST(GraphTest, OrderMatchesBruteForceOracle) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 6);
        SeedCorpus c;
        for (int s = 1; s <= n; ++s) c.records.push_back(node(s, {}, {{100 + s, 0}}));
        for (int s = 2; s <= n; ++s) {
            for (int p = 1; p < s; ++p) {
                if (rng() % 3 == 0) {
                    c.records[s - 1].consumedHandles.push_back(dynamic(100 + p, p));
                }
            }
        }
        std::shuffle(c.records.begin(), c.records.end(), rng);
        DependencyGraph g = build_dependency_graph(c);
        EXPECT_EQ(g.topologicalOrder(), brute_force_order(g.nodes, g.edges)) << "trial " << trial;
    }
}

TEST(GraphTest, IntegrityErrors) {
    // producer missing
    EXPECT_THROW(build_dependency_graph({{node(2, {dynamic(5, 1)})}}), CorpusIntegrityError);
    // producer after consumer
    EXPECT_THROW(build_dependency_graph({{node(1, {dynamic(5, 2)}), node(2, {}, {{5, 0}})}}),
                 CorpusIntegrityError);
    // producer never produced the handle
    EXPECT_THROW(build_dependency_graph({{node(1, {}, {{4, 0}}), node(2, {dynamic(5, 1)})}}),
                 CorpusIntegrityError);
    // duplicate seq
    EXPECT_THROW(build_dependency_graph({{node(1), node(1)}}), CorpusIntegrityError);
    // static without descriptor
    EXPECT_THROW(build_dependency_graph({{node(1, {{0, 3, std::nullopt, ""}})}}), CorpusIntegrityError);
}

// ---------------------------------------------------------------------------
// Persistence

TEST(CorpusIoTest, JsonLinesRoundTrip) {
    Recording rec = record_scenario("all");
    const std::string text = corpus_to_jsonl(rec.corpus);
    EXPECT_TRUE(text.starts_with(R"({"corpus_manifest_ref":"manifest.json","format_version":1})"));
    EXPECT_EQ(corpus_from_jsonl(text), rec.corpus);
    EXPECT_EQ(corpus_to_jsonl(corpus_from_jsonl(text)), text);

    const auto path = std::filesystem::temp_directory_path() / "ipcfuzz_corpus_test.jsonl";
    save_corpus(rec.corpus, path.string());
    EXPECT_EQ(load_corpus(path.string()), rec.corpus);
    std::filesystem::remove(path);
}

TEST(CorpusIoTest, StaticProducerSerializesAsKeyword) {
    SeedRecord r = node(1, {{0, 2, std::nullopt, "svc.audio"}});
    nlohmann::json j = seed_to_json(r);
    EXPECT_EQ(j["consumed_handles"][0]["producer"], "STATIC");
    EXPECT_EQ(seed_from_json(j), r);
}

TEST(CorpusIoTest, RejectsBadHeader) {
    EXPECT_THROW(corpus_from_jsonl(R"({"format_version":99})" "\n"), CorpusIntegrityError);
}

TEST(CorpusIoTest, ShippedCorpusMatchesFreshRecording) {
    SeedCorpus shipped = load_corpus(std::string(IPCFUZZ_CORPUS_DIR) + "/seeds.jsonl");
    EXPECT_EQ(shipped, record_scenario("all").corpus);
}

}  // namespace
}  // namespace ipcfuzz
