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

#include "ipcfuzz/replayer.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace ipcfuzz {

namespace {

int32_t slot_value(std::span<const uint8_t> bytes, uint32_t pos) {
    int32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    return v;
}

Handle resolve(HandleMap& map, Router& router, const std::string& descriptor, int seq,
               std::string_view sender) {
    if (auto it = map.byDescriptor.find(descriptor); it != map.byDescriptor.end()) return it->second;
    Parcel data;
    data.writeString(descriptor);
    Reply reply = router.transact({kServiceManagerHandle, kGetServiceCode, std::move(data), 0,
                                   std::string(sender)});
    if (!reply.isOk()) {
        throw ReplayFailure(seq, "cannot resolve service " + descriptor + ": " +
                                         std::string(to_string(reply.kind())));
    }
    const Handle h = reply.payload().readHandle().handle;
    map.byDescriptor.emplace(descriptor, h);
    return h;
}

void resolve_statics(HandleMap& map, Router& router, const SeedRecord& record,
                     std::string_view sender) {
    for (const auto& c : record.consumedHandles) {
        if (!c.isStatic()) continue;
        map.recorded[c.handle] = resolve(map, router, c.descriptor, record.seq, sender).value;
    }
}

}  // namespace

std::optional<int32_t> HandleMap::live(int32_t recordedId) const {
    auto it = recorded.find(recordedId);
    if (it == recorded.end()) return std::nullopt;
    return it->second;
}

std::vector<int> plan(int seedSeq, const DependencyGraph& graph) {
    if (!graph.contains(seedSeq)) {
        throw CorpusIntegrityError("seed " + std::to_string(seedSeq) + " is not in the graph");
    }
    std::set<int> ancestors;
    std::vector<int> frontier = {seedSeq};
    while (!frontier.empty()) {
        const int n = frontier.back();
        frontier.pop_back();
        for (const auto& e : graph.edges) {
            if (e.consumer != n || ancestors.contains(e.producer)) continue;
            if (!graph.contains(e.producer)) {
                throw CorpusIntegrityError("ancestor " + std::to_string(e.producer) + " is missing");
            }
            ancestors.insert(e.producer);
            frontier.push_back(e.producer);
        }
    }
    std::vector<int> out;
    for (int n : graph.topologicalOrder()) {
        if (ancestors.contains(n)) out.push_back(n);
    }
    return out;
}

HandleMap replay(const std::vector<int>& plan, Router& router, const SeedCorpus& corpus,
                 std::optional<int> terminalSeq, const std::vector<std::string>& extraDescriptors,
                 std::string_view sender) {
    HandleMap map;
    auto record_for = [&](int seq) -> const SeedRecord& {
        const SeedRecord* r = corpus.find(seq);
        if (r == nullptr) throw CorpusIntegrityError("seed " + std::to_string(seq) + " is missing");
        return *r;
    };

    for (const auto& d : extraDescriptors) resolve(map, router, d, 0, sender);
    for (int seq : plan) {
        const SeedRecord& r = record_for(seq);
        resolve(map, router, r.descriptor, seq, sender);
        resolve_statics(map, router, r, sender);
    }
    if (terminalSeq) {
        const SeedRecord& r = record_for(*terminalSeq);
        resolve(map, router, r.descriptor, r.seq, sender);
        resolve_statics(map, router, r, sender);
    }

    for (int seq : plan) {
        const SeedRecord& r = record_for(seq);
        Parcel data = r.payload();
        for (uint32_t pos : r.offsets) {
            const int32_t recordedId = slot_value(data.data(), pos);
            auto live = map.live(recordedId);
            if (!live) {
                throw ReplayFailure(seq, "seed " + std::to_string(seq) + " needs unmapped handle " +
                                                 std::to_string(recordedId));
            }
            data.patchInt32(pos, *live);
        }
        Reply reply = router.transact(
                {map.byDescriptor.at(r.descriptor), r.code, std::move(data), 0, std::string(sender)});
        if (!reply.isOk()) {
            throw ReplayFailure(seq, "supporting seed " + std::to_string(seq) + " answered " +
                                             std::string(to_string(reply.kind())));
        }
        const auto& payload = reply.payload();
        for (const auto& p : r.producedHandles) {
            const auto& offs = payload.offsets();
            if (std::find(offs.begin(), offs.end(), p.position) == offs.end()) {
                throw ReplayFailure(seq, "reply of seed " + std::to_string(seq) +
                                                 " has no handle at " + std::to_string(p.position));
            }
            map.recorded[p.handle] = slot_value(payload.data(), p.position);
        }
    }

    map.liveDescriptors = router.namedServices();
    return map;
}

Transaction materialize(const FuzzCase& fuzzCase, const HandleMap& map, std::string_view sender) {
    auto target = map.byDescriptor.find(fuzzCase.descriptor);
    if (target == map.byDescriptor.end()) {
        throw MaterializationError("target " + fuzzCase.descriptor + " was not resolved");
    }
    Parcel data;
    try {
        data = Parcel::fromHex(fuzzCase.payloadHex, fuzzCase.offsets);
    } catch (const std::exception& e) {
        throw MaterializationError(std::string("bad case template: ") + e.what());
    }
    for (uint32_t pos : fuzzCase.offsets) {
        auto directive = fuzzCase.slotDirectives.find(pos);
        if (directive != fuzzCase.slotDirectives.end()) {
            if (directive->second == SlotDirective::Keep) continue;
            auto other = std::find_if(map.liveDescriptors.begin(), map.liveDescriptors.end(),
                                      [&](const auto& e) {
                                          return e.first != kServiceManagerHandle &&
                                                 e.second != fuzzCase.descriptor;
                                      });
            if (other == map.liveDescriptors.end()) {
                throw MaterializationError("no other live service for a cross-service swap");
            }
            data.patchInt32(pos, other->first.value);
            continue;
        }
        const int32_t recordedId = slot_value(data.data(), pos);
        auto live = map.live(recordedId);
        if (!live) throw MaterializationError("handle " + std::to_string(recordedId) + " is unmapped");
        data.patchInt32(pos, *live);
    }
    for (const auto& [pos, d] : fuzzCase.slotDirectives) {
        if (std::find(fuzzCase.offsets.begin(), fuzzCase.offsets.end(), pos) == fuzzCase.offsets.end()) {
            throw MaterializationError("slot directive at " + std::to_string(pos) + " is not a handle slot");
        }
    }
    return {target->second, fuzzCase.code, std::move(data), 0, std::string(sender)};
}

}  // namespace ipcfuzz
