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

// Command-line front end. Exit status: 0 ran clean, 2 crashes found, 1 error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ipcfuzz/harness.hpp"
#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/services.hpp"

namespace {

using namespace ipcfuzz;

constexpr int kExitClean = 0;
constexpr int kExitCrashes = 2;
constexpr int kExitError = 1;

std::vector<Policy> parse_policies(const std::string& text) {
    std::vector<Policy> out;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        auto p = policy_from_string(part);
        if (!p) throw CampaignConfigError("unknown policy: " + part);
        out.push_back(*p);
    }
    if (out.empty()) throw CampaignConfigError("no policy given");
    return out;
}

int cmd_list(bool asJson) {
    if (asJson) {
        std::cout << manifest_json().dump(2) << "\n";
        return kExitClean;
    }
    for (const auto& reg : services::registries()) {
        std::cout << reg.descriptor << "\n";
        for (const auto& m : reg.methods) {
            std::cout << "  " << m.code << "  " << m.name << "(";
            for (size_t i = 0; i < m.signature.size(); ++i) {
                std::cout << (i ? ", " : "") << m.signature[i];
            }
            std::cout << ")" << (m.hidden ? "  [hidden]" : "") << "\n";
        }
    }
    std::cout << "\nscenarios:\n";
    for (const auto& s : scenarios()) std::cout << "  " << s.name << "  " << s.summary << "\n";
    return kExitClean;
}

int cmd_record(const std::string& scenario, const std::string& out) {
    Recording rec = record_scenario(scenario);
    build_dependency_graph(rec.corpus);
    save_corpus(rec.corpus, out);
    std::cout << "recorded " << rec.corpus.records.size() << " transactions to " << out << "\n";
    return kExitClean;
}

int cmd_fuzz(CampaignConfig config, const std::string& out, bool quiet) {
    CampaignReport report = run_fuzz(config);
    if (!out.empty()) save_report(report, out);
    if (!quiet) std::cout << report_as_text(report);
    return report.crashes.empty() ? kExitClean : kExitCrashes;
}

int cmd_replay(const std::string& reportPath, const std::string& fp, std::string corpusPath) {
    CampaignReport report = load_report(reportPath);
    if (corpusPath.empty()) corpusPath = report.config.corpusPath;
    SeedCorpus corpus = corpusPath.empty() ? SeedCorpus{} : load_corpus(corpusPath);
    Reply reply = reproduce(report, fp, corpus);
    const auto& crash = reply.crash();
    std::cout << "reproduced " << fp << ": " << to_string(crash.kind) << "\n";
    for (const auto& f : crash.stackFrames) std::cout << "  at " << f << "\n";
    return kExitCrashes;
}

int cmd_report(const std::string& in, const std::string& format) {
    CampaignReport report = load_report(in);
    if (format == "json") {
        std::cout << canonical_report(report);
    } else {
        std::cout << report_as_text(report);
    }
    return report.crashes.empty() ? kExitClean : kExitCrashes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structure-aware fuzzer for a simulated binder IPC stack"};
    app.require_subcommand(1);

    bool listJson = false;
    auto* list = app.add_subcommand("list", "Show services, methods and scenarios");
    list->add_flag("--json", listJson, "Print the corpus manifest as JSON");

    std::string scenario;
    std::string recordOut = "corpus.jsonl";
    auto* record = app.add_subcommand("record", "Record a scripted client scenario");
    record->add_option("--scenario", scenario, "Scenario name")->required();
    record->add_option("--out", recordOut, "Seed corpus output");

    std::string policies = "semi-valid";
    std::string mode = "isolated";
    std::string fuzzOut;
    bool quiet = false;
    CampaignConfig config;
    auto* fuzz = app.add_subcommand("fuzz", "Run a fuzzing campaign");
    fuzz->add_option("--policy", policies, "empty, random, semi-valid or a comma list");
    fuzz->add_option("--corpus", config.corpusPath, "Seed corpus (JSON lines)");
    fuzz->add_option("--budget", config.budget, "Number of cases")->check(CLI::PositiveNumber);
    fuzz->add_option("--rng-seed", config.rngSeed, "Seed for the RANDOM policy");
    fuzz->add_option("--workers", config.workers, "Parallel workers")->check(CLI::PositiveNumber);
    fuzz->add_option("--mode", mode, "isolated or reuse")->check(CLI::IsMember({"isolated", "reuse"}));
    fuzz->add_option("--out", fuzzOut, "Report output");
    fuzz->add_flag("--quiet", quiet, "Do not print the summary");

    std::string replayReport;
    std::string fp;
    std::string replayCorpus;
    auto* replay = app.add_subcommand("replay", "Reproduce a crash from a saved report");
    replay->add_option("--report", replayReport, "Campaign report")->required();
    replay->add_option("--fingerprint", fp, "Crash fingerprint")->required();
    replay->add_option("--corpus", replayCorpus, "Override the corpus path from the report");

    std::string reportIn;
    std::string format = "text";
    auto* report = app.add_subcommand("report", "Render a saved report");
    report->add_option("--in", reportIn, "Campaign report")->required();
    report->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitClean : kExitError;
    }

    try {
        if (*list) return cmd_list(listJson);
        if (*record) return cmd_record(scenario, recordOut);
        if (*fuzz) {
            config.policies = parse_policies(policies);
            config.mode = *execution_mode_from_string(mode);
            return cmd_fuzz(config, fuzzOut, quiet);
        }
        if (*replay) return cmd_replay(replayReport, fp, replayCorpus);
        if (*report) return cmd_report(reportIn, format);
    } catch (const std::exception& e) {
        std::cerr << "ipcfuzz: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
