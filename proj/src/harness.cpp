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

#include "ipcfuzz/harness.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "ipcfuzz/services.hpp"

namespace ipcfuzz {

using nlohmann::json;

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Ok: return "ok";
        case Outcome::Rejected: return "rejected";
        case Outcome::HandledFault: return "handled_fault";
        case Outcome::FatalCrash: return "fatal_crash";
        case Outcome::Unreplayable: return "unreplayable";
    }
    return "?";
}

Outcome classify(const Reply& reply) {
    switch (reply.kind()) {
        case ReplyKind::Ok: return Outcome::Ok;
        case ReplyKind::Rejected: return Outcome::Rejected;
        case ReplyKind::HandledFault: return Outcome::HandledFault;
        case ReplyKind::FatalCrash: return Outcome::FatalCrash;
    }
    return Outcome::Unreplayable;
}

namespace {

std::string sha256_hex(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    return to_hex(std::span<const uint8_t>(digest, length));
}

}  // namespace

std::string fingerprint(ExceptionKind kind, const std::vector<std::string>& frames) {
    if (frames.empty()) throw std::invalid_argument("fingerprint needs at least one frame");
    std::string text(to_string(kind));
    for (size_t i = 0; i < frames.size() && i < kFingerprintDepth; ++i) {
        text += '\n';
        text += frames[i];
    }
    return sha256_hex(text).substr(0, 16);
}

std::string fingerprint(const CrashInfo& crash) {
    return fingerprint(crash.kind, crash.stackFrames);
}

std::string_view to_string(ExecutionMode mode) {
    return mode == ExecutionMode::Reuse ? "reuse" : "isolated";
}

std::optional<ExecutionMode> execution_mode_from_string(std::string_view name) {
    if (name == "isolated") return ExecutionMode::Isolated;
    if (name == "reuse") return ExecutionMode::Reuse;
    return std::nullopt;
}

void OutcomeCounters::add(Outcome outcome) {
    switch (outcome) {
        case Outcome::Ok: ++ok; break;
        case Outcome::Rejected: ++rejected; break;
        case Outcome::HandledFault: ++handledFault; break;
        case Outcome::FatalCrash: ++fatalCrash; break;
        case Outcome::Unreplayable: ++unreplayable; break;
    }
}

const CrashReport* CampaignReport::find(std::string_view fp) const {
    for (const auto& c : crashes) {
        if (c.fingerprint == fp) return &c;
    }
    return nullptr;
}

std::vector<std::string> attribute(const CrashReport& crash, const std::vector<IpcEdge>& edges,
                                   size_t window) {
    std::vector<const IpcEdge*> recent;
    for (const auto& e : edges) {
        if (e.seq <= crash.edgeSeq) recent.push_back(&e);
    }
    std::sort(recent.begin(), recent.end(), [](auto* a, auto* b) { return a->seq > b->seq; });
    if (recent.size() > window) recent.resize(window);
    std::vector<std::string> out;
    for (const IpcEdge* e : recent) {
        if (e->descriptor != crash.descriptor) continue;
        if (std::find(out.begin(), out.end(), e->sender) == out.end()) out.push_back(e->sender);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

class TerminalTrace : public TransactionObserver {
public:
    ParcelObserver* beginDispatch(const Transaction&, std::string_view) override { return &mBuilder; }
    void endDispatch(const Transaction&, const Reply&) override { mTrace = mBuilder.finish(); }
    TraceNode take() { return std::move(mTrace); }

private:
    TraceBuilder mBuilder;
    TraceNode mTrace;
};

using EdgeSummary = std::map<std::pair<std::string, std::string>, uint64_t>;

class Worker {
public:
    Worker(const SeedCorpus& corpus, const DependencyGraph& graph, ExecutionMode mode)
          : mCorpus(corpus), mGraph(graph), mMode(mode) {}

    CaseResult run(const FuzzCase& c, bool keepReply) {
        CaseResult result;
        try {
            prepare(c);
            Transaction txn = materialize(c, *mMap);
            TerminalTrace trace;
            mRouter->setObserver(&trace);
            Reply reply = mRouter->transact(std::move(txn));
            mRouter->setObserver(nullptr);
            result.outcome = classify(reply);
            result.edgeSeq = mRouter->edges().back().seq;
            if (result.outcome == Outcome::FatalCrash) {
                result.crash = reply.crash();
                result.schema = trace.take();
                CrashReport probe;
                probe.descriptor = c.descriptor;
                probe.edgeSeq = result.edgeSeq;
                result.candidateSenders = attribute(probe, mRouter->edges());
            }
            if (keepReply) result.reply = std::move(reply);
        } catch (const std::exception& e) {
            if (mRouter) mRouter->setObserver(nullptr);
            result.outcome = Outcome::Unreplayable;
            result.reason = e.what();
            mMap.reset();
        }
        harvestEdges();
        return result;
    }

    const EdgeSummary& edges() const { return mEdges; }

private:
    void prepare(const FuzzCase& c) {
        std::vector<int> supporting;
        if (c.seedSeq) supporting = plan(*c.seedSeq, mGraph);
        const auto key = std::make_tuple(supporting, c.seedSeq, c.descriptor);

        if (mMode == ExecutionMode::Isolated || !mRouter) {
            harvestEdges();
            mRouter = services::make_target_router();
            mEdgeCursor = 0;
            mMap.reset();
        } else {
            mRouter->resetAll();
        }
        if (!mMap || key != mKey) {
            mMap.reset();
            mMap = replay(supporting, *mRouter, mCorpus, c.seedSeq, {c.descriptor});
            mKey = key;
        }
    }

    void harvestEdges() {
        if (!mRouter) return;
        const auto& edges = mRouter->edges();
        for (; mEdgeCursor < edges.size(); ++mEdgeCursor) {
            ++mEdges[{edges[mEdgeCursor].sender, edges[mEdgeCursor].descriptor}];
        }
    }

    const SeedCorpus& mCorpus;
    const DependencyGraph& mGraph;
    ExecutionMode mMode;
    std::unique_ptr<Router> mRouter;
    std::optional<HandleMap> mMap;
    std::tuple<std::vector<int>, std::optional<int>, std::string> mKey;
    size_t mEdgeCursor = 0;
    EdgeSummary mEdges;
};

bool needs_corpus(const std::vector<Policy>& policies) {
    return std::find(policies.begin(), policies.end(), Policy::SemiValid) != policies.end();
}

Provenance provenance_of(const FuzzCase& c, uint64_t rngSeed) {
    Provenance p;
    p.policy = c.policy;
    p.caseId = c.caseId;
    p.descriptor = c.descriptor;
    p.code = c.code;
    p.rngSeed = rngSeed;
    p.seedSeq = c.seedSeq;
    p.fieldPath = c.fieldPath;
    p.mutationId = c.mutationId;
    p.randomLength = c.randomLength;
    p.subSeed = c.subSeed;
    return p;
}

}  // namespace

CaseResult execute_case(const FuzzCase& fuzzCase, const SeedCorpus& corpus,
                        const DependencyGraph& graph) {
    Worker worker(corpus, graph, ExecutionMode::Isolated);
    return worker.run(fuzzCase, true);
}

std::vector<FuzzCase> generate_cases(const CampaignConfig& config, const SeedCorpus& corpus) {
    std::vector<FuzzCase> cases;
    for (Policy p : config.policies) {
        if (cases.size() >= config.budget) break;
        auto more = generate_campaign(corpus, p, config.budget - cases.size(), config.rngSeed,
                                      cases.size() + 1);
        std::move(more.begin(), more.end(), std::back_inserter(cases));
    }
    return cases;
}

std::string corpus_id(const SeedCorpus& corpus) {
    return sha256_hex(corpus_to_jsonl(corpus)).substr(0, 16);
}

CampaignReport run_fuzz(const CampaignConfig& config, const SeedCorpus& corpus) {
    if (config.policies.empty()) throw CampaignConfigError("no policy selected");
    if (config.budget < 1) throw CampaignConfigError("budget must be at least 1");
    if (config.workers < 1) throw CampaignConfigError("need at least one worker");
    if (needs_corpus(config.policies) && corpus.records.empty()) {
        throw CampaignConfigError("SEMI_VALID needs a non-empty seed corpus");
    }
    const DependencyGraph graph = build_dependency_graph(corpus);
    const auto cases = generate_cases(config, corpus);

    std::vector<CaseResult> results(cases.size());
    std::vector<EdgeSummary> summaries(config.workers);
    auto shard = [&](unsigned w) {
        Worker worker(corpus, graph, config.mode);
        for (size_t i = w; i < cases.size(); i += config.workers) {
            results[i] = worker.run(cases[i], false);
        }
        summaries[w] = worker.edges();
    };
    if (config.workers == 1) {
        shard(0);
    } else {
        std::vector<std::jthread> threads;
        for (unsigned w = 0; w < config.workers; ++w) threads.emplace_back(shard, w);
    }

    CampaignReport report;
    report.config = config;
    if (report.config.corpusId.empty()) report.config.corpusId = corpus_id(corpus);
    report.catalogVersion = std::string(kCatalogVersion);
    report.executed = cases.size();
    report.unexecuted = config.budget - cases.size();

    std::map<std::string, CrashReport> crashes;
    for (size_t i = 0; i < cases.size(); ++i) {
        const FuzzCase& c = cases[i];
        CaseResult& r = results[i];
        report.counters.add(r.outcome);
        report.perMethod[{c.descriptor, c.code}].add(r.outcome);
        if (r.outcome == Outcome::Unreplayable) report.unreplayable.emplace_back(c.caseId, r.reason);
        if (r.outcome != Outcome::FatalCrash) continue;

        const std::string fp = fingerprint(*r.crash);
        auto [it, fresh] = crashes.try_emplace(fp);
        CrashReport& cr = it->second;
        if (fresh) {
            cr.fingerprint = fp;
            cr.exceptionKind = r.crash->kind;
            cr.severity = r.crash->severity;
            cr.descriptor = c.descriptor;
            cr.code = c.code;
            cr.stackFrames = r.crash->stackFrames;
            cr.detail = r.crash->detail;
            cr.provenance = provenance_of(c, config.rngSeed);
            cr.schema = std::move(r.schema);
            cr.firstSeenCaseId = c.caseId;
            cr.edgeSeq = r.edgeSeq;
            cr.candidateSenders = r.candidateSenders;
        }
        ++cr.hitCount;
    }
    for (auto& [fp, cr] : crashes) report.crashes.push_back(std::move(cr));
    for (const auto& s : summaries) {
        for (const auto& [k, n] : s) report.edgeSummary[k] += n;
    }
    return report;
}

CampaignReport run_fuzz(const CampaignConfig& config) {
    SeedCorpus corpus;
    if (!config.corpusPath.empty()) {
        corpus = load_corpus(config.corpusPath);
    } else if (needs_corpus(config.policies)) {
        throw CampaignConfigError("SEMI_VALID needs --corpus");
    }
    return run_fuzz(config, corpus);
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json counters_to_json(const OutcomeCounters& c) {
    return {{"ok", c.ok},
            {"rejected", c.rejected},
            {"handled_fault", c.handledFault},
            {"fatal_crash", c.fatalCrash},
            {"unreplayable", c.unreplayable}};
}

OutcomeCounters counters_from_json(const json& j) {
    OutcomeCounters c;
    c.ok = j.at("ok").get<uint64_t>();
    c.rejected = j.at("rejected").get<uint64_t>();
    c.handledFault = j.at("handled_fault").get<uint64_t>();
    c.fatalCrash = j.at("fatal_crash").get<uint64_t>();
    c.unreplayable = j.at("unreplayable").get<uint64_t>();
    return c;
}

json provenance_to_json(const Provenance& p) {
    json j = {{"policy", to_string(p.policy)},
              {"case_id", p.caseId},
              {"descriptor", p.descriptor},
              {"code", p.code},
              {"rng_seed", p.rngSeed}};
    if (p.seedSeq) j["seed_seq"] = *p.seedSeq;
    if (p.fieldPath) j["field_path"] = to_string(*p.fieldPath);
    if (p.mutationId) j["mutation_id"] = *p.mutationId;
    if (p.randomLength) j["random_length"] = *p.randomLength;
    if (p.subSeed) j["sub_seed"] = *p.subSeed;
    return j;
}

Provenance provenance_from_json(const json& j) {
    Provenance p;
    auto policy = policy_from_string(j.at("policy").get<std::string>());
    if (!policy) throw std::invalid_argument("bad policy in provenance");
    p.policy = *policy;
    p.caseId = j.at("case_id").get<uint64_t>();
    p.descriptor = j.at("descriptor").get<std::string>();
    p.code = j.at("code").get<MethodCode>();
    p.rngSeed = j.at("rng_seed").get<uint64_t>();
    if (j.contains("seed_seq")) p.seedSeq = j["seed_seq"].get<int>();
    if (j.contains("field_path")) p.fieldPath = field_path_from_string(j["field_path"].get<std::string>());
    if (j.contains("mutation_id")) p.mutationId = j["mutation_id"].get<std::string>();
    if (j.contains("random_length")) p.randomLength = j["random_length"].get<uint32_t>();
    if (j.contains("sub_seed")) p.subSeed = j["sub_seed"].get<uint64_t>();
    return p;
}

json crash_to_json(const CrashReport& c) {
    return {{"fingerprint", c.fingerprint},
            {"exception_kind", to_string(c.exceptionKind)},
            {"severity", to_string(c.severity)},
            {"descriptor", c.descriptor},
            {"code", c.code},
            {"stack_frames", c.stackFrames},
            {"detail", c.detail},
            {"provenance", provenance_to_json(c.provenance)},
            {"schema", trace_to_json(c.schema)},
            {"first_seen_case_id", c.firstSeenCaseId},
            {"hit_count", c.hitCount},
            {"edge_seq", c.edgeSeq},
            {"candidate_senders", c.candidateSenders}};
}

CrashReport crash_from_json(const json& j) {
    CrashReport c;
    c.fingerprint = j.at("fingerprint").get<std::string>();
    auto kind = exception_kind_from_string(j.at("exception_kind").get<std::string>());
    if (!kind) throw std::invalid_argument("bad exception kind in report");
    c.exceptionKind = *kind;
    c.severity = j.at("severity").get<std::string>() == "critical" ? Severity::Critical
                                                                   : Severity::Normal;
    c.descriptor = j.at("descriptor").get<std::string>();
    c.code = j.at("code").get<MethodCode>();
    c.stackFrames = j.at("stack_frames").get<std::vector<std::string>>();
    c.detail = j.at("detail").get<std::string>();
    c.provenance = provenance_from_json(j.at("provenance"));
    c.schema = trace_from_json(j.at("schema"));
    c.firstSeenCaseId = j.at("first_seen_case_id").get<uint64_t>();
    c.hitCount = j.at("hit_count").get<uint64_t>();
    c.edgeSeq = j.at("edge_seq").get<uint64_t>();
    c.candidateSenders = j.at("candidate_senders").get<std::vector<std::string>>();
    return c;
}

}  // namespace

json report_to_json(const CampaignReport& r) {
    json policies = json::array();
    for (Policy p : r.config.policies) policies.push_back(to_string(p));
    json config = {{"policies", policies},
                   {"budget", r.config.budget},
                   {"rng_seed", r.config.rngSeed},
                   {"catalog_version", r.catalogVersion},
                   {"corpus_id", r.config.corpusId},
                   {"corpus_path", r.config.corpusPath},
                   {"mode", to_string(r.config.mode)}};

    json counters = counters_to_json(r.counters);
    counters["executed"] = r.executed;
    counters["unexecuted"] = r.unexecuted;

    json perMethod = json::array();
    for (const auto& [key, c] : r.perMethod) {
        json entry = counters_to_json(c);
        entry["descriptor"] = key.first;
        entry["code"] = key.second;
        perMethod.push_back(std::move(entry));
    }
    json crashes = json::array();
    for (const auto& c : r.crashes) crashes.push_back(crash_to_json(c));
    json edges = json::array();
    for (const auto& [key, n] : r.edgeSummary) {
        edges.push_back({{"sender", key.first}, {"descriptor", key.second}, {"count", n}});
    }
    json unreplayable = json::array();
    for (const auto& [id, reason] : r.unreplayable) {
        unreplayable.push_back({{"case_id", id}, {"reason", reason}});
    }
    return {{"config", config},
            {"counters", counters},
            {"per_method", perMethod},
            {"crashes", crashes},
            {"ipc_edges", edges},
            {"unreplayable", unreplayable}};
}

CampaignReport report_from_json(const json& j) {
    CampaignReport r;
    const auto& config = j.at("config");
    r.config.policies.clear();
    for (const auto& p : config.at("policies")) {
        auto policy = policy_from_string(p.get<std::string>());
        if (!policy) throw std::invalid_argument("bad policy in report");
        r.config.policies.push_back(*policy);
    }
    r.config.budget = config.at("budget").get<size_t>();
    r.config.rngSeed = config.at("rng_seed").get<uint64_t>();
    r.catalogVersion = config.at("catalog_version").get<std::string>();
    r.config.corpusId = config.at("corpus_id").get<std::string>();
    r.config.corpusPath = config.at("corpus_path").get<std::string>();
    r.config.mode = execution_mode_from_string(config.at("mode").get<std::string>())
                            .value_or(ExecutionMode::Isolated);

    const auto& counters = j.at("counters");
    r.counters = counters_from_json(counters);
    r.executed = counters.at("executed").get<uint64_t>();
    r.unexecuted = counters.at("unexecuted").get<uint64_t>();
    for (const auto& m : j.at("per_method")) {
        r.perMethod[{m.at("descriptor").get<std::string>(), m.at("code").get<MethodCode>()}] =
                counters_from_json(m);
    }
    for (const auto& c : j.at("crashes")) r.crashes.push_back(crash_from_json(c));
    for (const auto& e : j.at("ipc_edges")) {
        r.edgeSummary[{e.at("sender").get<std::string>(), e.at("descriptor").get<std::string>()}] =
                e.at("count").get<uint64_t>();
    }
    for (const auto& u : j.at("unreplayable")) {
        r.unreplayable.emplace_back(u.at("case_id").get<uint64_t>(), u.at("reason").get<std::string>());
    }
    return r;
}

std::string canonical_report(const CampaignReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

std::string report_as_text(const CampaignReport& r) {
    std::ostringstream out;
    out << "policies:";
    for (Policy p : r.config.policies) out << ' ' << to_string(p);
    out << "\nbudget: " << r.config.budget << " (executed " << r.executed << ", unexecuted "
        << r.unexecuted << ")\n";
    out << "rng seed: " << r.config.rngSeed << "\ncatalog: " << r.catalogVersion
        << "\ncorpus: " << r.config.corpusId << "\n";
    out << "outcomes: ok " << r.counters.ok << ", rejected " << r.counters.rejected
        << ", handled_fault " << r.counters.handledFault << ", fatal_crash "
        << r.counters.fatalCrash << ", unreplayable " << r.counters.unreplayable << "\n";
    out << "distinct crashes: " << r.crashes.size() << "\n";
    for (const auto& c : r.crashes) {
        out << "  " << c.fingerprint << "  " << to_string(c.exceptionKind) << "  " << c.descriptor
            << ":" << c.code << "  hits " << c.hitCount << "  first case " << c.firstSeenCaseId
            << "\n    at " << c.stackFrames.front() << "\n";
        if (c.provenance.mutationId) {
            out << "    via " << *c.provenance.mutationId << " on seed " << *c.provenance.seedSeq
                << " field " << to_string(c.provenance.fieldPath.value_or(FieldPath{})) << "\n";
        }
    }
    return out.str();
}

void save_report(const CampaignReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << canonical_report(report);
}

CampaignReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return report_from_json(json::parse(in));
}

// ---------------------------------------------------------------------------
// Reproduction

FuzzCase regenerate_case(const Provenance& p, const SeedCorpus& corpus) {
    FuzzCase c;
    try {
        switch (p.policy) {
            case Policy::Empty: c = make_empty(p.descriptor, p.code); break;
            case Policy::Random:
                if (!p.randomLength || !p.subSeed) {
                    throw MaterializationError("random provenance lacks length or sub-seed");
                }
                c = make_random(p.descriptor, p.code, *p.randomLength, *p.subSeed);
                break;
            case Policy::SemiValid: {
                if (!p.seedSeq || !p.fieldPath || !p.mutationId) {
                    throw MaterializationError("semi-valid provenance is incomplete");
                }
                const SeedRecord* seed = corpus.find(*p.seedSeq);
                if (seed == nullptr) {
                    throw MaterializationError("seed " + std::to_string(*p.seedSeq) + " is not in the corpus");
                }
                c = mutate_field(*seed, *p.fieldPath, *p.mutationId);
                if (c.descriptor != p.descriptor || c.code != p.code) {
                    throw MaterializationError("seed target does not match the provenance");
                }
                break;
            }
        }
    } catch (const MaterializationError&) {
        throw;
    } catch (const std::exception& e) {
        throw MaterializationError(std::string("cannot rebuild case: ") + e.what());
    }
    c.caseId = p.caseId;
    return c;
}

Reply reproduce(const CampaignReport& report, std::string_view fp, const SeedCorpus& corpus) {
    const CrashReport* crash = report.find(fp);
    if (crash == nullptr) {
        throw ReproductionError("no crash with fingerprint " + std::string(fp) + " in the report");
    }
    const FuzzCase c = regenerate_case(crash->provenance, corpus);
    CaseResult result = execute_case(c, corpus, build_dependency_graph(corpus));
    if (result.outcome == Outcome::Unreplayable) throw MaterializationError(result.reason);
    if (result.outcome != Outcome::FatalCrash) {
        throw ReproductionError("case " + std::to_string(c.caseId) + " answered " +
                                std::string(to_string(result.outcome)));
    }
    const std::string again = fingerprint(*result.crash);
    if (again != fp) {
        throw ReproductionError("fingerprint mismatch: expected " + std::string(fp) + ", got " + again);
    }
    return std::move(*result.reply);
}

// ---------------------------------------------------------------------------
// Manifest

json manifest_json() {
    json servicesJson = json::array();
    size_t bugCount = 0;
    for (const auto& reg : services::registries()) {
        json methods = json::array();
        for (const auto& m : reg.methods) {
            methods.push_back({{"code", m.code},
                               {"name", m.name},
                               {"signature", m.signature},
                               {"hidden", m.hidden}});
        }
        json bugs = json::array();
        for (const auto& b : services::seeded_bugs()) {
            if (b.descriptor != reg.descriptor) continue;
            ++bugCount;
            bugs.push_back({{"id", b.id},
                            {"code", b.code},
                            {"trigger", b.trigger},
                            {"exception_kind", to_string(b.kind)},
                            {"top_frames", b.topFrames},
                            {"expected_fingerprint", fingerprint(b.kind, b.topFrames)},
                            {"blind_reachable", b.blindReachable},
                            {"reachability", b.reachability}});
        }
        servicesJson.push_back(
                {{"descriptor", reg.descriptor}, {"methods", methods}, {"seeded_bugs", bugs}});
    }
    return {{"format_version", 1},
            {"catalog_version", kCatalogVersion},
            {"bug_count", bugCount},
            {"services", servicesJson}};
}

}  // namespace ipcfuzz
