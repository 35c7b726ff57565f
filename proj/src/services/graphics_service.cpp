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

class GraphicsService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "graphics.onTransact");
        if (code != graphics::kCreateNativeHandle) return Reply::rejected("unknown transaction code");
        return createNativeHandle(data, ctx);
    }

private:
    Reply createNativeHandle(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "graphics.createNativeHandle");
        std::string consumer;
        int32_t numFds;
        int32_t numInts;
        try {
            consumer = data.readString("consumer");
            numFds = data.readInt32("numFds");
            numInts = data.readInt32("numInts");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad native handle request: ") + e.what());
        }
        if (consumer.empty()) return Reply::rejected("missing consumer name");
        const uint32_t allocated = nativeHandleCreate(numFds, numInts, ctx);
        Parcel reply;
        reply.writeInt32(static_cast<int32_t>(allocated));
        return Reply::ok(std::move(reply));
    }

    // numFds and numInts are not checked: the allocation size wraps in 32
    // bits while the slot writes that follow use the true count.
    uint32_t nativeHandleCreate(int32_t numFds, int32_t numInts, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "graphics.nativeHandleCreate");
        const uint32_t allocated =
                graphics::kHeaderBytes +
                4u * (static_cast<uint32_t>(numFds) + static_cast<uint32_t>(numInts));
        const int64_t required = static_cast<int64_t>(graphics::kHeaderBytes) +
                4 * (static_cast<int64_t>(numFds) + static_cast<int64_t>(numInts));
        if (required > static_cast<int64_t>(allocated)) {
            ctx.crash(ExceptionKind::MemoryCorruption, "graphics.nativeHandleCreate.write_slots",
                      "heap overflow: wrote " + std::to_string(required) + " bytes into a " +
                              std::to_string(allocated) + "-byte allocation",
                      Severity::Critical);
        }
        ++mCreated;
        return allocated;
    }

    int mCreated = 0;
};

}  // namespace

std::unique_ptr<Service> make_graphics_service() {
    return std::make_unique<GraphicsService>();
}

}  // namespace ipcfuzz::services
