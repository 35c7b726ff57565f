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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ipcfuzz/parcel.hpp"
#include "ipcfuzz/router.hpp"

namespace ipcfuzz {

// ---------------------------------------------------------------------------
// Type traces

// One node of a hierarchical deserialization trace. The root is an unlabeled
// COMPOSITE spanning everything the server consumed.
struct TraceNode {
    FieldKind kind = FieldKind::Composite;
    std::string label;
    size_t begin = 0;
    size_t end = 0;
    std::vector<TraceNode> children;

    bool isLeaf() const { return kind != FieldKind::Composite; }
    bool operator==(const TraceNode&) const = default;
};

using TypeTrace = TraceNode;

// Child-index path from the root.
using FieldPath = std::vector<size_t>;

std::string to_string(const FieldPath& path);
FieldPath field_path_from_string(std::string_view text);

// Throws std::out_of_range for a path that leaves the tree.
const TraceNode& node_at(const TraceNode& root, const FieldPath& path);

// Depth-first, left-to-right.
std::vector<FieldPath> leaf_paths(const TraceNode& root);
std::vector<FieldPath> composite_paths(const TraceNode& root);  // excludes the root
std::vector<WriteRecord> leaf_sequence(const TraceNode& root);

nlohmann::json trace_to_json(const TraceNode& node);
TraceNode trace_from_json(const nlohmann::json& j);

// Builds a TraceNode from parcel read callbacks.
class TraceBuilder : public ParcelObserver {
public:
    TraceBuilder();

    void onRead(FieldKind kind, size_t begin, size_t end, std::string_view label) override;
    void onScopeBegin(std::string_view label, size_t position) override;
    void onScopeEnd(size_t position) override;

    // Closes any scope left open by a fault and returns the tree.
    TraceNode finish();

private:
    void closeTop(size_t position);

    std::vector<TraceNode> mOpen;
    std::vector<size_t> mOpenedAt;
};

// ---------------------------------------------------------------------------
// Seed corpus

struct ConsumedHandle {
    uint32_t position = 0;
    int32_t handle = 0;
    // Producing seed, or nullopt for a STATIC handle resolved by descriptor.
    std::optional<int> producerSeq;
    std::string descriptor;  // STATIC only

    bool isStatic() const { return !producerSeq.has_value(); }
    bool operator==(const ConsumedHandle&) const = default;
};

struct ProducedHandle {
    int32_t handle = 0;
    uint32_t position = 0;  // byte position in the reply parcel

    bool operator==(const ProducedHandle&) const = default;
};

struct SeedRecord {
    int seq = 0;
    std::string descriptor;
    MethodCode code = 0;
    std::string payloadHex;
    std::vector<uint32_t> offsets;
    TypeTrace trace;
    std::vector<ConsumedHandle> consumedHandles;
    std::vector<ProducedHandle> producedHandles;
    ReplyKind replyKind = ReplyKind::Ok;

    Parcel payload() const { return Parcel::fromHex(payloadHex, offsets); }
    bool operator==(const SeedRecord&) const = default;
};

struct SeedCorpus {
    std::vector<SeedRecord> records;

    const SeedRecord* find(int seq) const;
    bool operator==(const SeedCorpus&) const = default;
};

class CorpusIntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr std::string_view kCorpusManifestRef = "manifest.json";

nlohmann::json seed_to_json(const SeedRecord& record);
SeedRecord seed_from_json(const nlohmann::json& j);

// Header line then one SeedRecord object per line.
std::string corpus_to_jsonl(const SeedCorpus& corpus);
SeedCorpus corpus_from_jsonl(std::string_view text);
void save_corpus(const SeedCorpus& corpus, const std::string& path);
SeedCorpus load_corpus(const std::string& path);

// ---------------------------------------------------------------------------
// Dependency graph

struct DependencyEdge {
    int producer = 0;
    int consumer = 0;
    int32_t handle = 0;

    bool operator==(const DependencyEdge&) const = default;
};

struct DependencyGraph {
    std::vector<int> nodes;
    std::vector<DependencyEdge> edges;
    std::map<int, std::vector<std::string>> staticPrerequisites;

    bool contains(int seq) const;
    // Kahn's algorithm; ties broken by ascending seq.
    std::vector<int> topologicalOrder() const;
};

DependencyGraph build_dependency_graph(const SeedCorpus& corpus);

// ---------------------------------------------------------------------------
// Recording

// Router observer that turns every transaction into a SeedRecord.
class SessionRecorder : public TransactionObserver {
public:
    explicit SessionRecorder(Router& router);

    ParcelObserver* beginDispatch(const Transaction& txn, std::string_view descriptor) override;
    void endDispatch(const Transaction& txn, const Reply& reply) override;

    const SeedCorpus& corpus() const { return mCorpus; }
    const std::vector<std::vector<WriteRecord>>& writerLogs() const { return mWriterLogs; }

private:
    Router& mRouter;
    SeedCorpus mCorpus;
    std::vector<std::vector<WriteRecord>> mWriterLogs;
    std::optional<TraceBuilder> mBuilder;
    std::string mDescriptor;
    // handle -> producing seq; service-manager productions are static.
    std::map<int32_t, int> mProducedBy;
    std::map<int32_t, bool> mProducedStatic;
};

struct Recording {
    SeedCorpus corpus;
    // Writer-side encoding log per record, captured independently of the trace.
    std::vector<std::vector<WriteRecord>> writerLogs;
};

class RecordingAborted : public std::runtime_error {
public:
    RecordingAborted(const std::string& what, Recording partial)
          : std::runtime_error(what), mPartial(std::move(partial)) {}
    const Recording& partial() const { return mPartial; }

private:
    Recording mPartial;
};

// A scripted client program; it must only use client wrappers.
using Scenario = std::function<void(Router&)>;

Recording record_session(const Scenario& scenario, Router& router);

struct NamedScenario {
    std::string name;
    std::string summary;
    Scenario run;
};

const std::vector<NamedScenario>& scenarios();
const NamedScenario* find_scenario(std::string_view name);

// Records `name` against a fresh target router.
Recording record_scenario(std::string_view name);

}  // namespace ipcfuzz
