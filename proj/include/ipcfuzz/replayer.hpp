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

#include "ipcfuzz/mutator.hpp"
#include "ipcfuzz/recorder.hpp"
#include "ipcfuzz/router.hpp"

namespace ipcfuzz {

inline constexpr std::string_view kReplaySender = "ipcfuzz.replayer";

struct HandleMap {
    // Recorded handle id -> live handle id, for dynamic and STATIC slots.
    std::map<int32_t, int32_t> recorded;
    // Descriptor -> live handle for resolved services.
    std::map<std::string, Handle, std::less<>> byDescriptor;
    // Every named service live in the router, ascending by handle.
    std::vector<std::pair<Handle, std::string>> liveDescriptors;

    std::optional<int32_t> live(int32_t recordedId) const;
};

// A supporting transaction did not answer OK; the case is unreplayable.
class ReplayFailure : public std::runtime_error {
public:
    ReplayFailure(int seq, const std::string& what) : std::runtime_error(what), mSeq(seq) {}
    int seq() const { return mSeq; }

private:
    int mSeq;
};

class MaterializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Ancestors of `seedSeq` in topological order, ties broken by seq. Throws
// CorpusIntegrityError when the seed or an ancestor is missing.
std::vector<int> plan(int seedSeq, const DependencyGraph& graph);

// Resolves STATIC prerequisites of the plan (and of `terminalSeq`, when given)
// plus `extraDescriptors`, then runs every supporting transaction in order and
// harvests the handles its reply produces.
HandleMap replay(const std::vector<int>& plan, Router& router, const SeedCorpus& corpus,
                 std::optional<int> terminalSeq = std::nullopt,
                 const std::vector<std::string>& extraDescriptors = {},
                 std::string_view sender = kReplaySender);

// Builds the terminal transaction: target resolved by descriptor, handle slots
// patched from the map unless a slot directive says otherwise.
Transaction materialize(const FuzzCase& fuzzCase, const HandleMap& map,
                        std::string_view sender = kReplaySender);

}  // namespace ipcfuzz
