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

#include "ipcfuzz/services.hpp"
#include "service_impls.hpp"

namespace ipcfuzz::services {

namespace {

constexpr std::string_view kTagSwitchSite = "activity.Bundle.tag_switch";
constexpr std::string_view kEntryLoopSite = "activity.Bundle.entry_loop";
constexpr std::string_view kReadBytesSite = "activity.Bundle.read_bytes";

class ActivityService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "activity.onTransact");
        if (code != activity::kStartActivity) return Reply::rejected("unknown transaction code");
        return startActivity(data, ctx);
    }

private:
    Reply startActivity(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "activity.startActivity");
        int32_t entries = 0;
        {
            ScopedFrame intentFrame(ctx, "activity.Intent.readFromParcel");
            ParcelScope scope(data, "Intent");
            try {
                data.readString("action");
                data.readString("data_uri");
            } catch (const ParcelError& e) {
                return Reply::rejected(std::string("bad intent header: ") + e.what());
            }
            ScopedFrame bundleFrame(ctx, "activity.Bundle.unparcel");
            entries = readBundle(data, ctx);
        }
        ++mStarted;
        Parcel reply;
        reply.writeInt32(entries);
        return Reply::ok(std::move(reply));
    }

    // Trusts the declared count, every tag, and every length. Nested bundles
    // recurse here without a new frame, so each site has one stack shape.
    int32_t readBundle(Parcel& data, DispatchContext& ctx) {
        ParcelScope scope(data, "Bundle");
        int32_t count = 0;
        try {
            count = data.readInt32("count");
        } catch (const ParcelError& e) {
            ctx.crash(ExceptionKind::MalformedParcel, kEntryLoopSite, e.what());
        }
        int32_t total = 0;
        for (int32_t i = 0; i < count; ++i) {
            ParcelScope entry(data, "Bundle.entry[" + std::to_string(i) + "]");
            int32_t tag = 0;
            try {
                data.readString("key");
                tag = data.readInt32("tag");
            } catch (const ParcelError& e) {
                ctx.crash(ExceptionKind::MalformedParcel, kEntryLoopSite,
                          "entry " + std::to_string(i) + ": " + e.what());
            }
            readValue(data, tag, ctx);
            ++total;
        }
        return total;
    }

    void readValue(Parcel& data, int32_t tag, DispatchContext& ctx) {
        if (tag < kMinBundleTag || tag > kMaxBundleTag) {
            ctx.crash(ExceptionKind::MalformedParcel, kTagSwitchSite,
                      "unknown type tag " + std::to_string(tag));
        }
        const auto kind = static_cast<BundleTag>(tag);
        if (kind == BundleTag::Bundle) {
            readBundle(data, ctx);
            return;
        }
        if (kind == BundleTag::Bytes) {
            try {
                data.readBytes("value");
            } catch (const ParcelError& e) {
                ctx.crash(ExceptionKind::MalformedParcel, kReadBytesSite, e.what());
            }
            return;
        }
        try {
            switch (kind) {
                case BundleTag::I32: data.readInt32("value"); break;
                case BundleTag::I64: data.readInt64("value"); break;
                case BundleTag::F64: data.readDouble("value"); break;
                case BundleTag::String: data.readString("value"); break;
                case BundleTag::Handle: data.readHandle("value"); break;
                default: break;
            }
        } catch (const ParcelError& e) {
            ctx.crash(ExceptionKind::MalformedParcel, kEntryLoopSite, e.what());
        }
    }

    int mStarted = 0;
};

}  // namespace

std::unique_ptr<Service> make_activity_service() {
    return std::make_unique<ActivityService>();
}

}  // namespace ipcfuzz::services
