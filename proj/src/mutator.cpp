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

#include "ipcfuzz/mutator.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <limits>
#include <random>

#include "ipcfuzz/services.hpp"

namespace ipcfuzz {

using nlohmann::json;

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::Empty: return "EMPTY";
        case Policy::Random: return "RANDOM";
        case Policy::SemiValid: return "SEMI_VALID";
    }
    return "?";
}

std::optional<Policy> policy_from_string(std::string_view name) {
    std::string norm;
    for (char c : name) {
        norm += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    for (auto p : {Policy::Empty, Policy::Random, Policy::SemiValid}) {
        if (to_string(p) == norm) return p;
    }
    return std::nullopt;
}

std::string_view to_string(SlotDirective directive) {
    return directive == SlotDirective::CrossService ? "cross_service" : "keep";
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

const std::vector<std::string> kIntegerMutations = {
        "plus_one", "minus_one", "zero", "max", "min", "negate", "flip_high_bit"};
const std::vector<std::string> kFloatMutations = {
        "zero", "nan", "pos_inf", "neg_inf", "max", "min_positive"};
const std::vector<std::string> kStringMutations = {
        "empty", "long_64k", "embedded_nul", "invalid_utf8", "format_specials",
        "declared_length_plus_4"};
const std::vector<std::string> kBytesMutations = {"truncate_half", "declared_length_max"};
const std::vector<std::string> kHandleMutations = {"zero_handle", "huge_handle",
                                                   "cross_service_swap"};
const std::vector<std::string> kNoMutations;

constexpr std::string_view kTagSwapPrefix = "tag_swap_";

template <typename T>
T mutate_integer(T v, std::string_view id) {
    using U = std::make_unsigned_t<T>;
    const U u = static_cast<U>(v);
    if (id == "plus_one") return static_cast<T>(u + 1);
    if (id == "minus_one") return static_cast<T>(u - 1);
    if (id == "zero") return 0;
    if (id == "max") return std::numeric_limits<T>::max();
    if (id == "min") return std::numeric_limits<T>::min();
    if (id == "negate") return static_cast<T>(U{0} - u);
    if (id == "flip_high_bit") return static_cast<T>(u ^ (U{1} << (sizeof(T) * 8 - 1)));
    throw CatalogError("unknown integer mutation " + std::string(id));
}

double mutate_float(std::string_view id) {
    if (id == "zero") return 0.0;
    if (id == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (id == "pos_inf") return std::numeric_limits<double>::infinity();
    if (id == "neg_inf") return -std::numeric_limits<double>::infinity();
    if (id == "max") return std::numeric_limits<double>::max();
    if (id == "min_positive") return std::numeric_limits<double>::denorm_min();
    throw CatalogError("unknown float mutation " + std::string(id));
}

bool in_catalog(FieldKind kind, std::string_view id) {
    const auto& list = catalog_for(kind);
    return std::find(list.begin(), list.end(), id) != list.end();
}

bool is_bundle_entry(const TraceNode& node) {
    return node.kind == FieldKind::Composite && node.label.starts_with("Bundle.entry[");
}

std::optional<size_t> tag_child(const TraceNode& node) {
    for (size_t i = 0; i < node.children.size(); ++i) {
        if (node.children[i].label == "tag" && node.children[i].kind == FieldKind::I32) return i;
    }
    return std::nullopt;
}

bool has_prefix(const FieldPath& path, const FieldPath& prefix) {
    return path.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

int32_t int32_at(std::span<const uint8_t> bytes, size_t pos) {
    int32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    return v;
}

template <typename T>
void append(std::vector<uint8_t>& out, T v) {
    const auto* p = reinterpret_cast<const uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

// Serializes and reports the start of each leaf.
Parcel serialize_with_positions(const std::vector<Leaf>& leaves, std::vector<size_t>* positions) {
    std::vector<uint8_t> out;
    std::vector<uint32_t> offsets;
    for (const auto& leaf : leaves) {
        if (positions) positions->push_back(out.size());
        switch (leaf.kind) {
            case FieldKind::Handle:
                offsets.push_back(static_cast<uint32_t>(out.size()));
                [[fallthrough]];
            case FieldKind::I32:
            case FieldKind::Bool:
                append(out, std::get<int32_t>(leaf.value));
                break;
            case FieldKind::I64: append(out, std::get<int64_t>(leaf.value)); break;
            case FieldKind::F64: append(out, std::get<double>(leaf.value)); break;
            case FieldKind::String:
            case FieldKind::Bytes: {
                std::span<const uint8_t> content;
                if (leaf.kind == FieldKind::String) {
                    const auto& s = std::get<std::string>(leaf.value);
                    content = {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
                } else {
                    content = std::get<std::vector<uint8_t>>(leaf.value);
                }
                append(out, leaf.declaredLength.value_or(detail::encode_length(content.size())));
                out.insert(out.end(), content.begin(), content.end());
                out.resize(out.size() + detail::padded(content.size()) - content.size(), 0);
                break;
            }
            case FieldKind::Composite:
                throw std::logic_error("composite in leaf list");
        }
    }
    return Parcel::fromBytes(std::move(out), std::move(offsets));
}

FuzzCase semi_valid_case(const SeedRecord& seed, const FieldPath& path, std::string_view id) {
    FuzzCase c;
    c.policy = Policy::SemiValid;
    c.descriptor = seed.descriptor;
    c.code = seed.code;
    c.seedSeq = seed.seq;
    c.fieldPath = path;
    c.mutationId = std::string(id);
    c.frameBreaking = is_frame_breaking(id);
    return c;
}

void set_template(FuzzCase& c, const Parcel& parcel) {
    c.payloadHex = parcel.toHex();
    c.offsets = parcel.offsets();
}

}  // namespace

const std::vector<std::string>& catalog_for(FieldKind kind) {
    switch (kind) {
        case FieldKind::I32:
        case FieldKind::I64:
        case FieldKind::Bool: return kIntegerMutations;
        case FieldKind::F64: return kFloatMutations;
        case FieldKind::String: return kStringMutations;
        case FieldKind::Bytes: return kBytesMutations;
        case FieldKind::Handle: return kHandleMutations;
        case FieldKind::Composite: return kNoMutations;
    }
    return kNoMutations;
}

bool is_frame_breaking(std::string_view id) {
    return id == "declared_length_plus_4" || id == "declared_length_max" ||
           id == "duplicate_subtree" || id == "remove_subtree" || id.starts_with(kTagSwapPrefix);
}

std::vector<std::string> structural_mutations(const SeedRecord& seed, const FieldPath& path) {
    const TraceNode& node = node_at(seed.trace, path);
    if (node.isLeaf()) return {};
    std::vector<std::string> out = {"duplicate_subtree", "remove_subtree"};
    if (!is_bundle_entry(node)) return out;
    auto tag = tag_child(node);
    if (!tag) return out;
    const auto bytes = seed.payload();
    const int32_t current = int32_at(bytes.data(), node.children[*tag].begin);
    for (int32_t t = services::kMinBundleTag; t <= services::kMaxBundleTag; ++t) {
        if (t != current) out.push_back(std::string(kTagSwapPrefix) + std::to_string(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Leaves

std::vector<Leaf> decompose(const SeedRecord& seed) {
    const Parcel payload = seed.payload();
    const auto bytes = payload.data();
    std::vector<Leaf> leaves;
    for (const auto& path : leaf_paths(seed.trace)) {
        const TraceNode& node = node_at(seed.trace, path);
        if (node.end > bytes.size() || node.begin > node.end) {
            throw CorpusIntegrityError("trace leaf outside payload in seq " + std::to_string(seed.seq));
        }
        Leaf leaf;
        leaf.kind = node.kind;
        switch (node.kind) {
            case FieldKind::I32:
            case FieldKind::Bool:
            case FieldKind::Handle: leaf.value = int32_at(bytes, node.begin); break;
            case FieldKind::I64: {
                int64_t v;
                std::memcpy(&v, bytes.data() + node.begin, 8);
                leaf.value = v;
                break;
            }
            case FieldKind::F64: {
                double v;
                std::memcpy(&v, bytes.data() + node.begin, 8);
                leaf.value = v;
                break;
            }
            case FieldKind::String:
            case FieldKind::Bytes: {
                const int32_t length = int32_at(bytes, node.begin);
                const size_t start = node.begin + 4;
                if (length < 0 || start + static_cast<size_t>(length) > node.end) {
                    throw CorpusIntegrityError("bad length prefix in seq " + std::to_string(seed.seq));
                }
                const auto* p = bytes.data() + start;
                if (node.kind == FieldKind::String) {
                    leaf.value = std::string(reinterpret_cast<const char*>(p), length);
                } else {
                    leaf.value = std::vector<uint8_t>(p, p + length);
                }
                break;
            }
            case FieldKind::Composite: break;
        }
        leaves.push_back(std::move(leaf));
    }
    return leaves;
}

Parcel serialize(const std::vector<Leaf>& leaves) {
    return serialize_with_positions(leaves, nullptr);
}

// ---------------------------------------------------------------------------
// Case generation

FuzzCase make_empty(std::string_view descriptor, MethodCode code) {
    FuzzCase c;
    c.policy = Policy::Empty;
    c.descriptor = std::string(descriptor);
    c.code = code;
    return c;
}

FuzzCase make_random(std::string_view descriptor, MethodCode code, size_t length,
                     uint64_t rngSeed) {
    if (length > kMaxRandomLength) throw CampaignConfigError("random payload above 64 KiB");
    std::mt19937_64 rng(rngSeed);
    std::vector<uint8_t> bytes(length);
    for (size_t i = 0; i < length; i += 8) {
        const uint64_t word = rng();
        for (size_t b = 0; b < 8 && i + b < length; ++b) {
            bytes[i + b] = static_cast<uint8_t>(word >> (8 * b));
        }
    }
    FuzzCase c;
    c.policy = Policy::Random;
    c.descriptor = std::string(descriptor);
    c.code = code;
    c.randomLength = static_cast<uint32_t>(length);
    c.subSeed = rngSeed;
    c.payloadHex = to_hex(bytes);
    return c;
}

std::vector<FieldPath> enumerate_fields(const SeedRecord& seed) {
    if (seed.trace.children.empty()) return {};
    return leaf_paths(seed.trace);
}

FuzzCase mutate_field(const SeedRecord& seed, const FieldPath& path, std::string_view id) {
    if (path.empty()) throw CatalogError("the trace root cannot be mutated");
    const TraceNode* found = nullptr;
    try {
        found = &node_at(seed.trace, path);
    } catch (const std::out_of_range& e) {
        throw CatalogError(e.what());
    }
    const TraceNode& node = *found;

    const auto paths = leaf_paths(seed.trace);
    std::vector<Leaf> leaves = decompose(seed);
    FuzzCase c = semi_valid_case(seed, path, id);

    if (!node.isLeaf()) {
        const auto allowed = structural_mutations(seed, path);
        if (std::find(allowed.begin(), allowed.end(), id) == allowed.end()) {
            throw CatalogError(std::string(id) + " does not apply to composite " + node.label);
        }
        size_t first = paths.size(), last = 0;
        for (size_t i = 0; i < paths.size(); ++i) {
            if (has_prefix(paths[i], path)) {
                first = std::min(first, i);
                last = i + 1;
            }
        }
        if (first >= last) {
            // An empty composite: nothing to duplicate or remove.
            set_template(c, serialize(leaves));
            return c;
        }
        if (id == "duplicate_subtree") {
            std::vector<Leaf> copy(leaves.begin() + first, leaves.begin() + last);
            leaves.insert(leaves.begin() + last, copy.begin(), copy.end());
        } else if (id == "remove_subtree") {
            leaves.erase(leaves.begin() + first, leaves.begin() + last);
        } else {
            FieldPath tagPath = path;
            tagPath.push_back(*tag_child(node));
            const size_t index = std::find(paths.begin(), paths.end(), tagPath) - paths.begin();
            leaves[index].value = static_cast<int32_t>(std::stoi(std::string(id.substr(kTagSwapPrefix.size()))));
        }
        set_template(c, serialize(leaves));
        return c;
    }

    if (!in_catalog(node.kind, id)) {
        throw CatalogError(std::string(id) + " does not apply to " + std::string(to_string(node.kind)));
    }
    const size_t index = std::find(paths.begin(), paths.end(), path) - paths.begin();
    Leaf& leaf = leaves[index];
    std::optional<SlotDirective> directive;

    switch (node.kind) {
        case FieldKind::I32:
        case FieldKind::Bool:
            leaf.value = mutate_integer(std::get<int32_t>(leaf.value), id);
            break;
        case FieldKind::I64:
            leaf.value = mutate_integer(std::get<int64_t>(leaf.value), id);
            break;
        case FieldKind::F64: leaf.value = mutate_float(id); break;
        case FieldKind::String: {
            auto& s = std::get<std::string>(leaf.value);
            if (id == "empty") {
                s.clear();
            } else if (id == "long_64k") {
                s.assign(kLongStringLength, 'A');
            } else if (id == "embedded_nul") {
                s.insert(s.begin() + static_cast<std::ptrdiff_t>(s.size() / 2), '\0');
            } else if (id == "invalid_utf8") {
                if (s.empty()) s = "\xFF";
                else s[0] = '\xFF';
            } else if (id == "format_specials") {
                s = "%s%n%x" + s;
            } else {
                leaf.declaredLength = detail::encode_length(s.size()) + 4;
            }
            break;
        }
        case FieldKind::Bytes: {
            auto& b = std::get<std::vector<uint8_t>>(leaf.value);
            if (id == "truncate_half") b.resize(b.size() / 2);
            else leaf.declaredLength = std::numeric_limits<int32_t>::max();
            break;
        }
        case FieldKind::Handle:
            if (id == "zero_handle") {
                leaf.value = int32_t{0};
                directive = SlotDirective::Keep;
            } else if (id == "huge_handle") {
                leaf.value = int32_t{0x7FFFFFFF};
                directive = SlotDirective::Keep;
            } else {
                directive = SlotDirective::CrossService;
            }
            break;
        case FieldKind::Composite: break;
    }

    std::vector<size_t> positions;
    set_template(c, serialize_with_positions(leaves, &positions));
    if (directive) c.slotDirectives[static_cast<uint32_t>(positions[index])] = *directive;
    return c;
}

std::vector<std::pair<std::string, MethodCode>> registry_methods() {
    std::vector<std::pair<std::string, MethodCode>> out;
    for (const auto& reg : services::registries()) {
        for (const auto& m : reg.methods) out.emplace_back(reg.descriptor, m.code);
    }
    return out;
}

uint64_t random_sub_seed(uint64_t rngSeed, uint64_t index) {
    // splitmix64 finalizer over the (seed, index) pair
    uint64_t z = rngSeed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<FuzzCase> generate_campaign(const SeedCorpus& corpus, Policy policy, size_t budget,
                                        uint64_t rngSeed, uint64_t firstCaseId) {
    if (budget < 1) throw CampaignConfigError("budget must be at least 1");
    std::vector<FuzzCase> out;
    auto push = [&](FuzzCase c) {
        c.caseId = firstCaseId + out.size();
        out.push_back(std::move(c));
        return out.size() < budget;
    };

    const auto methods = registry_methods();
    switch (policy) {
        case Policy::Empty:
            for (const auto& [descriptor, code] : methods) {
                if (!push(make_empty(descriptor, code))) break;
            }
            break;
        case Policy::Random:
            for (size_t i = 0; i < budget; ++i) {
                const auto& [descriptor, code] = methods[i % methods.size()];
                const uint32_t length = kRandomLengths[(i / methods.size()) % std::size(kRandomLengths)];
                push(make_random(descriptor, code, length, random_sub_seed(rngSeed, i)));
            }
            break;
        case Policy::SemiValid: {
            if (corpus.records.empty()) {
                throw CampaignConfigError("SEMI_VALID needs a non-empty seed corpus");
            }
            std::vector<const SeedRecord*> seeds;
            for (const auto& r : corpus.records) seeds.push_back(&r);
            std::sort(seeds.begin(), seeds.end(),
                      [](auto* a, auto* b) { return a->seq < b->seq; });
            for (const SeedRecord* seed : seeds) {
                for (const auto& path : enumerate_fields(*seed)) {
                    for (const auto& id : catalog_for(node_at(seed->trace, path).kind)) {
                        if (!push(mutate_field(*seed, path, id))) return out;
                    }
                }
                for (const auto& path : composite_paths(seed->trace)) {
                    for (const auto& id : structural_mutations(*seed, path)) {
                        if (!push(mutate_field(*seed, path, id))) return out;
                    }
                }
            }
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON

json case_to_json(const FuzzCase& c) {
    json j = {{"case_id", c.caseId},
              {"policy", to_string(c.policy)},
              {"descriptor", c.descriptor},
              {"code", c.code},
              {"frame_breaking", c.frameBreaking},
              {"payload_hex", c.payloadHex},
              {"offsets", c.offsets}};
    if (c.seedSeq) j["seed_seq"] = *c.seedSeq;
    if (c.fieldPath) j["field_path"] = to_string(*c.fieldPath);
    if (c.mutationId) j["mutation_id"] = *c.mutationId;
    if (c.randomLength) j["random_length"] = *c.randomLength;
    if (c.subSeed) j["sub_seed"] = *c.subSeed;
    json slots = json::array();
    for (const auto& [pos, d] : c.slotDirectives) slots.push_back({pos, to_string(d)});
    j["slot_directives"] = std::move(slots);
    return j;
}

FuzzCase case_from_json(const json& j) {
    FuzzCase c;
    c.caseId = j.at("case_id").get<uint64_t>();
    auto policy = policy_from_string(j.at("policy").get<std::string>());
    if (!policy) throw std::invalid_argument("bad policy " + j.at("policy").dump());
    c.policy = *policy;
    c.descriptor = j.at("descriptor").get<std::string>();
    c.code = j.at("code").get<MethodCode>();
    c.frameBreaking = j.value("frame_breaking", false);
    c.payloadHex = j.at("payload_hex").get<std::string>();
    c.offsets = j.at("offsets").get<std::vector<uint32_t>>();
    if (j.contains("seed_seq")) c.seedSeq = j["seed_seq"].get<int>();
    if (j.contains("field_path")) c.fieldPath = field_path_from_string(j["field_path"].get<std::string>());
    if (j.contains("mutation_id")) c.mutationId = j["mutation_id"].get<std::string>();
    if (j.contains("random_length")) c.randomLength = j["random_length"].get<uint32_t>();
    if (j.contains("sub_seed")) c.subSeed = j["sub_seed"].get<uint64_t>();
    for (const auto& s : j.value("slot_directives", json::array())) {
        const auto name = s.at(1).get<std::string>();
        c.slotDirectives[s.at(0).get<uint32_t>()] =
                name == "cross_service" ? SlotDirective::CrossService : SlotDirective::Keep;
    }
    return c;
}

}  // namespace ipcfuzz
