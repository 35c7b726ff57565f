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

class ViewService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "view.onTransact");
        if (code != view::kSetRemoteViews) return Reply::rejected("unknown transaction code");
        return setRemoteViews(data, ctx);
    }

private:
    Reply setRemoteViews(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "view.setRemoteViews");
        std::string package;
        try {
            package = data.readString("package");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad package: ") + e.what());
        }
        if (package.empty()) return Reply::rejected("missing package");

        int32_t nodes = 0;
        try {
            nodes = unparcel(data, ctx);
        } catch (const ParcelError& e) {
            // BadParcelableException escapes the stub regardless of depth.
            ctx.crash(ExceptionKind::MalformedParcel, "view.setRemoteViews.unparcel_failed",
                      e.what());
        }
        mLastPackage = std::move(package);
        Parcel reply;
        reply.writeInt32(nodes);
        return Reply::ok(std::move(reply));
    }

    // No depth bound: a non-normal mode decodes two more views.
    int32_t unparcel(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "view.RemoteViews.unparcel");
        ParcelScope scope(data, "RemoteViews");
        const int32_t mode = data.readInt32("mode");
        if (mode == view::kModeNormal) {
            data.readString("text");
            return 1;
        }
        const int32_t first = unparcel(data, ctx);
        const int32_t second = unparcel(data, ctx);
        return 1 + first + second;
    }

    std::string mLastPackage;
};

}  // namespace

std::unique_ptr<Service> make_view_service() {
    return std::make_unique<ViewService>();
}

}  // namespace ipcfuzz::services
