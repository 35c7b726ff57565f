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
#include <variant>
#include <vector>

#include <json.hpp>

#include "ipcfuzz/parcel.hpp"
#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/router.hpp"

namespace ipcfuzz {

inline constexpr std::string_view kCatalogVersion = "ipcfuzz-catalog/1";
inline constexpr size_t kMaxRandomLength = 64 * 1024;
inline constexpr size_t kLongStringLength = 65536;
inline constexpr uint32_t kRandomLengths[] = {0, 4, 16, 64, 256, 4096};

enum class Policy { Empty, Random, SemiValid };

std::string_view to_string(Policy policy);
// Accepts "EMPTY", "empty", "SEMI_VALID", "semi-valid" and so on.
std::optional<Policy> policy_from_string(std::string_view name);

// What the replayer does with a handle slot instead of patching it from the
// handle map.
enum class SlotDirective { Keep, CrossService };

std::string_view to_string(SlotDirective directive);

class CatalogError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class CampaignConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FuzzCase {
    uint64_t caseId = 0;
    Policy policy = Policy::Empty;
    std::string descriptor;
    MethodCode code = 0;

    std::optional<int> seedSeq;
    std::optional<FieldPath> fieldPath;
    std::optional<std::string> mutationId;
    bool frameBreaking = false;

    // RANDOM provenance.
    std::optional<uint32_t> randomLength;
    std::optional<uint64_t> subSeed;

    // Materialization template. Unmarked handle slots still hold the recorded
    // handle id and are patched at replay time.
    std::string payloadHex;
    std::vector<uint32_t> offsets;
    std::map<uint32_t, SlotDirective> slotDirectives;

    bool operator==(const FuzzCase&) const = default;
};

nlohmann::json case_to_json(const FuzzCase& fuzzCase);
FuzzCase case_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Catalog

// Ordered mutation names for a leaf kind. BOOL shares the integer list.
const std::vector<std::string>& catalog_for(FieldKind kind);
// Structural mutations applicable to a composite node, in enumeration order.
std::vector<std::string> structural_mutations(const SeedRecord& seed, const FieldPath& path);
bool is_frame_breaking(std::string_view mutationId);

// ---------------------------------------------------------------------------
// Leaf decomposition

using LeafValue = std::variant<int32_t, int64_t, double, std::string, std::vector<uint8_t>>;

struct Leaf {
    FieldKind kind = FieldKind::I32;
    LeafValue value;
    // Length prefix written instead of the real one (STRING and BYTES only).
    std::optional<int32_t> declaredLength;
};

// Leaf values in enumeration order, decoded from the seed payload.
std::vector<Leaf> decompose(const SeedRecord& seed);
// Re-encodes a leaf list. Offsets point at every HANDLE leaf.
Parcel serialize(const std::vector<Leaf>& leaves);

// ---------------------------------------------------------------------------
// Case generation

FuzzCase make_empty(std::string_view descriptor, MethodCode code);
FuzzCase make_random(std::string_view descriptor, MethodCode code, size_t length,
                     uint64_t rngSeed);

std::vector<FieldPath> enumerate_fields(const SeedRecord& seed);

// Leaf path: applies a catalog mutation to one leaf. Composite path: applies
// a structural mutation. Throws CatalogError on a mismatch.
FuzzCase mutate_field(const SeedRecord& seed, const FieldPath& path, std::string_view mutationId);

// Every (descriptor, code) in registry order; excludes the service manager.
std::vector<std::pair<std::string, MethodCode>> registry_methods();

uint64_t random_sub_seed(uint64_t rngSeed, uint64_t index);

// Cases for one policy, with case ids starting at `firstCaseId`. Stops after
// `budget` cases or when the policy runs out.
std::vector<FuzzCase> generate_campaign(const SeedCorpus& corpus, Policy policy, size_t budget,
                                        uint64_t rngSeed, uint64_t firstCaseId = 1);

}  // namespace ipcfuzz
