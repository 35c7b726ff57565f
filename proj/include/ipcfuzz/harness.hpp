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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ipcfuzz/mutator.hpp"
#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/replayer.hpp"
#include "ipcfuzz/router.hpp"

namespace ipcfuzz {

inline constexpr size_t kFingerprintDepth = 5;
inline constexpr size_t kAttributionWindow = 64;

enum class Outcome { Ok, Rejected, HandledFault, FatalCrash, Unreplayable };

std::string_view to_string(Outcome outcome);

Outcome classify(const Reply& reply);

// SHA-256 over the exception kind and the top frames, as 16 hex digits.
std::string fingerprint(const CrashInfo& crash);
std::string fingerprint(ExceptionKind kind, const std::vector<std::string>& frames);

// ---------------------------------------------------------------------------
// Campaigns

enum class ExecutionMode { Isolated, Reuse };

std::string_view to_string(ExecutionMode mode);
std::optional<ExecutionMode> execution_mode_from_string(std::string_view name);

struct CampaignConfig {
    std::vector<Policy> policies = {Policy::SemiValid};
    size_t budget = 10000;
    uint64_t rngSeed = 1;
    std::string corpusPath;
    std::string corpusId;  // derived from the corpus content when empty
    unsigned workers = 1;
    ExecutionMode mode = ExecutionMode::Isolated;
};

struct Provenance {
    Policy policy = Policy::Empty;
    uint64_t caseId = 0;
    std::string descriptor;
    MethodCode code = 0;
    uint64_t rngSeed = 0;
    std::optional<int> seedSeq;
    std::optional<FieldPath> fieldPath;
    std::optional<std::string> mutationId;
    std::optional<uint32_t> randomLength;
    std::optional<uint64_t> subSeed;
};

struct CrashReport {
    std::string fingerprint;
    ExceptionKind exceptionKind = ExceptionKind::UncaughtException;
    Severity severity = Severity::Normal;
    std::string descriptor;
    MethodCode code = 0;
    std::vector<std::string> stackFrames;
    std::string detail;
    Provenance provenance;  // of the first hit
    TypeTrace schema;       // parsed up to the failure point
    uint64_t firstSeenCaseId = 0;
    uint64_t hitCount = 0;
    uint64_t edgeSeq = 0;   // IPC edge of the crashing transaction
    std::vector<std::string> candidateSenders;
};

struct OutcomeCounters {
    uint64_t ok = 0;
    uint64_t rejected = 0;
    uint64_t handledFault = 0;
    uint64_t fatalCrash = 0;
    uint64_t unreplayable = 0;

    void add(Outcome outcome);
    uint64_t total() const { return ok + rejected + handledFault + fatalCrash + unreplayable; }
    bool operator==(const OutcomeCounters&) const = default;
};

struct CampaignReport {
    CampaignConfig config;
    std::string catalogVersion;
    uint64_t executed = 0;
    uint64_t unexecuted = 0;
    OutcomeCounters counters;
    std::map<std::pair<std::string, MethodCode>, OutcomeCounters> perMethod;
    std::vector<CrashReport> crashes;  // sorted by fingerprint
    std::map<std::pair<std::string, std::string>, uint64_t> edgeSummary;  // (sender, descriptor)
    std::vector<std::pair<uint64_t, std::string>> unreplayable;           // (case id, reason)

    const CrashReport* find(std::string_view fingerprint) const;
};

struct CaseResult {
    Outcome outcome = Outcome::Unreplayable;
    std::optional<CrashInfo> crash;
    TypeTrace schema;
    uint64_t edgeSeq = 0;
    std::vector<std::string> candidateSenders;
    std::string reason;  // unreplayable cases
    std::optional<Reply> reply;
};

// Runs one case in a fresh target router.
CaseResult execute_case(const FuzzCase& fuzzCase, const SeedCorpus& corpus,
                        const DependencyGraph& graph);

std::vector<FuzzCase> generate_cases(const CampaignConfig& config, const SeedCorpus& corpus);

// Configuration errors throw CampaignConfigError before any case runs.
CampaignReport run_fuzz(const CampaignConfig& config, const SeedCorpus& corpus);
// Loads config.corpusPath (when the policies need it) and runs.
CampaignReport run_fuzz(const CampaignConfig& config);

std::string corpus_id(const SeedCorpus& corpus);

// Canonical form: sorted keys, no wall-clock fields.
nlohmann::json report_to_json(const CampaignReport& report);
CampaignReport report_from_json(const nlohmann::json& j);
std::string canonical_report(const CampaignReport& report);
std::string report_as_text(const CampaignReport& report);
void save_report(const CampaignReport& report, const std::string& path);
CampaignReport load_report(const std::string& path);

class ReproductionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rebuilds a FuzzCase from provenance alone.
FuzzCase regenerate_case(const Provenance& provenance, const SeedCorpus& corpus);

// Regenerates and re-executes the crash; throws ReproductionError when the
// fingerprint is unknown or the reply no longer matches, and
// MaterializationError when the provenance cannot be rebuilt.
Reply reproduce(const CampaignReport& report, std::string_view fingerprint,
                const SeedCorpus& corpus);

// Senders with an edge into the crashing service among the last W edges up
// to and including the crash, most recent first.
std::vector<std::string> attribute(const CrashReport& crash, const std::vector<IpcEdge>& edges,
                                   size_t window = kAttributionWindow);

// Services, registries and seeded bugs with their expected fingerprints.
nlohmann::json manifest_json();

}  // namespace ipcfuzz
