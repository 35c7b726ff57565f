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

#include "ipcfuzz/services.hpp"

namespace ipcfuzz::services {

BundleTag tag_of(const BundleValue& value) {
    return static_cast<BundleTag>(static_cast<int32_t>(value.index()) + 1);
}

namespace {

size_t bundle_depth(const Bundle& bundle) {
    size_t deepest = 0;
    for (const auto& e : bundle.entries) {
        if (const auto* nested = std::get_if<Bundle>(&e.value)) {
            deepest = std::max(deepest, bundle_depth(*nested));
        }
    }
    return deepest + 1;
}

void write_bundle_body(Parcel& parcel, const Bundle& bundle) {
    parcel.writeInt32(detail::encode_length(bundle.entries.size()));
    for (const auto& entry : bundle.entries) {
        parcel.writeString(entry.key);
        parcel.writeInt32(static_cast<int32_t>(tag_of(entry.value)));
        std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, int32_t>) parcel.writeInt32(v);
                    else if constexpr (std::is_same_v<T, int64_t>) parcel.writeInt64(v);
                    else if constexpr (std::is_same_v<T, double>) parcel.writeDouble(v);
                    else if constexpr (std::is_same_v<T, std::string>) parcel.writeString(v);
                    else if constexpr (std::is_same_v<T, std::vector<uint8_t>>) parcel.writeBytes(v);
                    else if constexpr (std::is_same_v<T, Bundle>) write_bundle_body(parcel, v);
                    else parcel.writeHandle(v);
                },
                entry.value);
    }
}

}  // namespace

void write_bundle(Parcel& parcel, const Bundle& bundle) {
    if (bundle_depth(bundle) > activity::kMaxWriterDepth) {
        throw ClientError("bundle nesting exceeds " + std::to_string(activity::kMaxWriterDepth));
    }
    write_bundle_body(parcel, bundle);
}

void write_intent(Parcel& parcel, const IntentPayload& intent) {
    parcel.writeString(intent.action);
    parcel.writeString(intent.dataUri);
    write_bundle(parcel, intent.extras);
}

RemoteViewPayload RemoteViewPayload::leaf(std::string text) {
    RemoteViewPayload p;
    p.mode = view::kModeNormal;
    p.text = std::move(text);
    return p;
}

RemoteViewPayload RemoteViewPayload::split(RemoteViewPayload first, RemoteViewPayload second) {
    RemoteViewPayload p;
    p.mode = view::kModeSplit;
    p.children.push_back(std::move(first));
    p.children.push_back(std::move(second));
    return p;
}

size_t RemoteViewPayload::depth() const {
    size_t deepest = 0;
    for (const auto& c : children) deepest = std::max(deepest, c.depth());
    return deepest + 1;
}

namespace {

void write_views_body(Parcel& parcel, const RemoteViewPayload& views) {
    parcel.writeInt32(views.mode);
    if (views.mode == view::kModeNormal) {
        parcel.writeString(views.text);
        return;
    }
    for (const auto& c : views.children) write_views_body(parcel, c);
}

void check_views(const RemoteViewPayload& views) {
    if (views.mode == view::kModeNormal) {
        if (!views.children.empty()) throw ClientError("normal view with children");
        return;
    }
    if (views.children.size() != 2) throw ClientError("split view needs exactly two children");
    for (const auto& c : views.children) check_views(c);
}

}  // namespace

void write_remote_views(Parcel& parcel, const RemoteViewPayload& views) {
    if (views.depth() > view::kMaxWriterDepth) {
        throw ClientError("view hierarchy deeper than " + std::to_string(view::kMaxWriterDepth));
    }
    check_views(views);
    write_views_body(parcel, views);
}

}  // namespace ipcfuzz::services
