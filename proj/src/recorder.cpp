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

#include <algorithm>
#include <cstring>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "ipcfuzz/services.hpp"

namespace ipcfuzz {

using nlohmann::json;

namespace {

int32_t int32_at(std::span<const uint8_t> bytes, size_t position) {
    int32_t v = 0;
    if (position + 4 <= bytes.size()) std::memcpy(&v, bytes.data() + position, 4);
    return v;
}

void collect_leaves(const TraceNode& node, FieldPath& path, std::vector<FieldPath>& out) {
    if (node.isLeaf()) {
        out.push_back(path);
        return;
    }
    for (size_t i = 0; i < node.children.size(); ++i) {
        path.push_back(i);
        collect_leaves(node.children[i], path, out);
        path.pop_back();
    }
}

void collect_composites(const TraceNode& node, FieldPath& path, std::vector<FieldPath>& out) {
    for (size_t i = 0; i < node.children.size(); ++i) {
        if (node.children[i].isLeaf()) continue;
        path.push_back(i);
        out.push_back(path);
        collect_composites(node.children[i], path, out);
        path.pop_back();
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Trace helpers

std::string to_string(const FieldPath& path) {
    std::string out;
    for (size_t i = 0; i < path.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(path[i]);
    }
    return out;
}

FieldPath field_path_from_string(std::string_view text) {
    FieldPath path;
    if (text.empty()) return path;
    size_t start = 0;
    while (start <= text.size()) {
        const size_t dot = std::min(text.find('.', start), text.size());
        const auto part = text.substr(start, dot - start);
        if (part.empty() || part.find_first_not_of("0123456789") != std::string_view::npos) {
            throw std::invalid_argument("bad field path: " + std::string(text));
        }
        path.push_back(std::stoul(std::string(part)));
        start = dot + 1;
    }
    return path;
}

const TraceNode& node_at(const TraceNode& root, const FieldPath& path) {
    const TraceNode* node = &root;
    for (size_t index : path) {
        if (index >= node->children.size()) {
            throw std::out_of_range("field path " + to_string(path) + " leaves the trace");
        }
        node = &node->children[index];
    }
    return *node;
}

std::vector<FieldPath> leaf_paths(const TraceNode& root) {
    std::vector<FieldPath> out;
    FieldPath path;
    if (root.isLeaf()) return {path};
    collect_leaves(root, path, out);
    return out;
}

std::vector<FieldPath> composite_paths(const TraceNode& root) {
    std::vector<FieldPath> out;
    FieldPath path;
    collect_composites(root, path, out);
    return out;
}

std::vector<WriteRecord> leaf_sequence(const TraceNode& root) {
    std::vector<WriteRecord> out;
    for (const auto& path : leaf_paths(root)) {
        const auto& leaf = node_at(root, path);
        out.push_back({leaf.kind, leaf.begin, leaf.end});
    }
    return out;
}

json trace_to_json(const TraceNode& node) {
    json j = {{"kind", to_string(node.kind)},
              {"label", node.label},
              {"range", {node.begin, node.end}}};
    if (!node.isLeaf()) {
        json children = json::array();
        for (const auto& c : node.children) children.push_back(trace_to_json(c));
        j["children"] = std::move(children);
    }
    return j;
}

TraceNode trace_from_json(const json& j) {
    TraceNode node;
    auto kind = field_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw CorpusIntegrityError("unknown trace kind " + j.at("kind").dump());
    node.kind = *kind;
    node.label = j.at("label").get<std::string>();
    const auto& range = j.at("range");
    if (!range.is_array() || range.size() != 2) throw CorpusIntegrityError("bad trace range");
    node.begin = range[0].get<size_t>();
    node.end = range[1].get<size_t>();
    if (!node.isLeaf()) {
        for (const auto& c : j.at("children")) node.children.push_back(trace_from_json(c));
    }
    return node;
}

// ---------------------------------------------------------------------------
// TraceBuilder

TraceBuilder::TraceBuilder() {
    mOpen.emplace_back();
    mOpenedAt.push_back(0);
}

void TraceBuilder::onRead(FieldKind kind, size_t begin, size_t end, std::string_view label) {
    TraceNode leaf;
    leaf.kind = kind;
    leaf.label = std::string(label);
    leaf.begin = begin;
    leaf.end = end;
    mOpen.back().children.push_back(std::move(leaf));
}

void TraceBuilder::onScopeBegin(std::string_view label, size_t position) {
    TraceNode node;
    node.kind = FieldKind::Composite;
    node.label = std::string(label);
    mOpen.push_back(std::move(node));
    mOpenedAt.push_back(position);
}

void TraceBuilder::onScopeEnd(size_t position) {
    if (mOpen.size() > 1) closeTop(position);
}

void TraceBuilder::closeTop(size_t position) {
    TraceNode node = std::move(mOpen.back());
    const size_t openedAt = mOpenedAt.back();
    mOpen.pop_back();
    mOpenedAt.pop_back();
    if (node.children.empty()) {
        node.begin = node.end = std::min(openedAt, position);
    } else {
        node.begin = node.children.front().begin;
        node.end = node.children.back().end;
    }
    mOpen.back().children.push_back(std::move(node));
}

TraceNode TraceBuilder::finish() {
    while (mOpen.size() > 1) closeTop(mOpenedAt.back());
    TraceNode root = std::move(mOpen.front());
    root.begin = 0;
    root.end = root.children.empty() ? 0 : root.children.back().end;
    mOpen.clear();
    mOpenedAt.clear();
    mOpen.emplace_back();
    mOpenedAt.push_back(0);
    return root;
}

// ---------------------------------------------------------------------------
// Persistence

const SeedRecord* SeedCorpus::find(int seq) const {
    for (const auto& r : records) {
        if (r.seq == seq) return &r;
    }
    return nullptr;
}

json seed_to_json(const SeedRecord& record) {
    json consumed = json::array();
    for (const auto& c : record.consumedHandles) {
        json entry = {{"position", c.position}, {"handle", c.handle}};
        if (c.isStatic()) {
            entry["producer"] = "STATIC";
            entry["descriptor"] = c.descriptor;
        } else {
            entry["producer"] = *c.producerSeq;
        }
        consumed.push_back(std::move(entry));
    }
    json produced = json::array();
    for (const auto& p : record.producedHandles) produced.push_back({p.handle, p.position});
    return {{"seq", record.seq},
            {"descriptor", record.descriptor},
            {"code", record.code},
            {"payload_hex", record.payloadHex},
            {"offsets", record.offsets},
            {"trace", trace_to_json(record.trace)},
            {"consumed_handles", std::move(consumed)},
            {"produced_handles", std::move(produced)},
            {"reply_kind", to_string(record.replyKind)}};
}

SeedRecord seed_from_json(const json& j) {
    SeedRecord r;
    r.seq = j.at("seq").get<int>();
    r.descriptor = j.at("descriptor").get<std::string>();
    r.code = j.at("code").get<MethodCode>();
    r.payloadHex = j.at("payload_hex").get<std::string>();
    r.offsets = j.at("offsets").get<std::vector<uint32_t>>();
    r.trace = trace_from_json(j.at("trace"));
    for (const auto& c : j.at("consumed_handles")) {
        ConsumedHandle h;
        h.position = c.at("position").get<uint32_t>();
        h.handle = c.at("handle").get<int32_t>();
        const auto& producer = c.at("producer");
        if (producer.is_string()) {
            if (producer.get<std::string>() != "STATIC") {
                throw CorpusIntegrityError("bad producer " + producer.dump());
            }
            h.descriptor = c.at("descriptor").get<std::string>();
        } else {
            h.producerSeq = producer.get<int>();
        }
        r.consumedHandles.push_back(std::move(h));
    }
    for (const auto& p : j.at("produced_handles")) {
        r.producedHandles.push_back({p.at(0).get<int32_t>(), p.at(1).get<uint32_t>()});
    }
    auto kind = reply_kind_from_string(j.at("reply_kind").get<std::string>());
    if (!kind) throw CorpusIntegrityError("bad reply kind " + j.at("reply_kind").dump());
    r.replyKind = *kind;
    return r;
}

std::string corpus_to_jsonl(const SeedCorpus& corpus) {
    std::string out;
    json header = {{"format_version", kCorpusFormatVersion},
                   {"corpus_manifest_ref", kCorpusManifestRef}};
    out += header.dump();
    out += '\n';
    for (const auto& r : corpus.records) {
        out += seed_to_json(r).dump();
        out += '\n';
    }
    return out;
}

SeedCorpus corpus_from_jsonl(std::string_view text) {
    SeedCorpus corpus;
    std::istringstream in{std::string(text)};
    std::string line;
    bool sawHeader = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusIntegrityError(std::string("corpus line is not JSON: ") + e.what());
        }
        if (!sawHeader) {
            if (!j.contains("format_version") || j["format_version"] != kCorpusFormatVersion) {
                throw CorpusIntegrityError("missing or unsupported corpus header");
            }
            sawHeader = true;
            continue;
        }
        try {
            corpus.records.push_back(seed_from_json(j));
        } catch (const json::exception& e) {
            throw CorpusIntegrityError(std::string("bad seed record: ") + e.what());
        }
    }
    if (!sawHeader) throw CorpusIntegrityError("empty corpus file");
    return corpus;
}

void save_corpus(const SeedCorpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << corpus_to_jsonl(corpus);
}

SeedCorpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return corpus_from_jsonl(buffer.str());
}

// ---------------------------------------------------------------------------
// Dependency graph

bool DependencyGraph::contains(int seq) const {
    return std::find(nodes.begin(), nodes.end(), seq) != nodes.end();
}

std::vector<int> DependencyGraph::topologicalOrder() const {
    std::map<int, int> indegree;
    std::map<int, std::vector<int>> out;
    for (int n : nodes) indegree[n] = 0;
    std::set<std::pair<int, int>> seen;
    for (const auto& e : edges) {
        if (!seen.insert({e.producer, e.consumer}).second) continue;
        out[e.producer].push_back(e.consumer);
        ++indegree[e.consumer];
    }
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (const auto& [n, d] : indegree) {
        if (d == 0) ready.push(n);
    }
    std::vector<int> order;
    while (!ready.empty()) {
        const int n = ready.top();
        ready.pop();
        order.push_back(n);
        for (int m : out[n]) {
            if (--indegree[m] == 0) ready.push(m);
        }
    }
    if (order.size() != indegree.size()) throw CorpusIntegrityError("dependency graph has a cycle");
    return order;
}

DependencyGraph build_dependency_graph(const SeedCorpus& corpus) {
    DependencyGraph graph;
    std::map<int, const SeedRecord*> bySeq;
    for (const auto& r : corpus.records) {
        if (!bySeq.emplace(r.seq, &r).second) {
            throw CorpusIntegrityError("duplicate seq " + std::to_string(r.seq));
        }
        graph.nodes.push_back(r.seq);
    }
    std::sort(graph.nodes.begin(), graph.nodes.end());

    for (const auto& r : corpus.records) {
        for (const auto& c : r.consumedHandles) {
            if (c.isStatic()) {
                if (c.descriptor.empty()) {
                    throw CorpusIntegrityError("STATIC handle without descriptor in seq " +
                                               std::to_string(r.seq));
                }
                auto& prereqs = graph.staticPrerequisites[r.seq];
                if (std::find(prereqs.begin(), prereqs.end(), c.descriptor) == prereqs.end()) {
                    prereqs.push_back(c.descriptor);
                }
                continue;
            }
            const int producer = *c.producerSeq;
            auto it = bySeq.find(producer);
            if (it == bySeq.end() || producer >= r.seq) {
                throw CorpusIntegrityError("seq " + std::to_string(r.seq) + " consumes handle " +
                                           std::to_string(c.handle) + " with no earlier producer");
            }
            const auto& produced = it->second->producedHandles;
            const bool found = std::any_of(produced.begin(), produced.end(),
                                           [&](const ProducedHandle& p) { return p.handle == c.handle; });
            if (!found) {
                throw CorpusIntegrityError("seq " + std::to_string(producer) +
                                           " never produced handle " + std::to_string(c.handle));
            }
            DependencyEdge edge{producer, r.seq, c.handle};
            if (std::find(graph.edges.begin(), graph.edges.end(), edge) == graph.edges.end()) {
                graph.edges.push_back(edge);
            }
        }
    }
    return graph;
}

// ---------------------------------------------------------------------------
// Recording

SessionRecorder::SessionRecorder(Router& router) : mRouter(router) {}

ParcelObserver* SessionRecorder::beginDispatch(const Transaction&, std::string_view descriptor) {
    mBuilder.emplace();
    mDescriptor = std::string(descriptor);
    return &*mBuilder;
}

void SessionRecorder::endDispatch(const Transaction& txn, const Reply& reply) {
    SeedRecord record;
    record.seq = static_cast<int>(mCorpus.records.size()) + 1;
    record.descriptor = mDescriptor;
    record.code = txn.code;
    record.payloadHex = txn.data.toHex();
    record.offsets = txn.data.offsets();
    record.trace = mBuilder ? mBuilder->finish() : TraceNode{};
    record.replyKind = reply.kind();
    mBuilder.reset();

    const auto bytes = txn.data.data();
    for (const auto& leaf : leaf_sequence(record.trace)) {
        if (leaf.kind != FieldKind::Handle) continue;
        ConsumedHandle c;
        c.position = static_cast<uint32_t>(leaf.begin);
        c.handle = int32_at(bytes, leaf.begin);
        auto producer = mProducedBy.find(c.handle);
        if (producer != mProducedBy.end() && !mProducedStatic[c.handle]) {
            c.producerSeq = producer->second;
        } else {
            c.descriptor = mRouter.descriptorOf(Handle{c.handle}).value_or("");
        }
        record.consumedHandles.push_back(std::move(c));
    }

    if (reply.isOk()) {
        const auto& payload = reply.payload();
        const bool fromManager = txn.target == kServiceManagerHandle;
        for (uint32_t pos : payload.offsets()) {
            const int32_t h = int32_at(payload.data(), pos);
            record.producedHandles.push_back({h, pos});
            mProducedBy.emplace(h, record.seq);
            mProducedStatic.emplace(h, fromManager);
        }
    }

    mWriterLogs.push_back(txn.data.writeLog().value_or(std::vector<WriteRecord>{}));
    mCorpus.records.push_back(std::move(record));
}

Recording record_session(const Scenario& scenario, Router& router) {
    SessionRecorder recorder(router);
    router.setObserver(&recorder);
    try {
        scenario(router);
    } catch (const services::ClientError& e) {
        router.setObserver(nullptr);
        throw RecordingAborted(std::string("client-side error: ") + e.what(),
                               {recorder.corpus(), recorder.writerLogs()});
    } catch (const services::RemoteError& e) {
        router.setObserver(nullptr);
        throw RecordingAborted(std::string("server refused a scenario call: ") + e.what(),
                               {recorder.corpus(), recorder.writerLogs()});
    }
    router.setObserver(nullptr);
    return {recorder.corpus(), recorder.writerLogs()};
}

Recording record_scenario(std::string_view name) {
    const NamedScenario* scenario = find_scenario(name);
    if (scenario == nullptr) throw std::invalid_argument("unknown scenario: " + std::string(name));
    auto router = services::make_target_router();
    return record_session(scenario->run, *router);
}

}  // namespace ipcfuzz
