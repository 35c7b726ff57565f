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

#include <array>

#include "ipcfuzz/services.hpp"
#include "service_impls.hpp"

namespace ipcfuzz::services {

namespace {

class BluetoothService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "bluetooth.onTransact");
        switch (code) {
            case bluetooth::kRegisterAppConfiguration: return registerAppConfiguration(data, ctx);
            case bluetooth::kGetState: {
                Parcel reply;
                reply.writeInt32(bluetooth::kStateOn);
                return Reply::ok(std::move(reply));
            }
            default: return Reply::rejected("unknown transaction code");
        }
    }

private:
    // The client wrapper bounds `count` and matches it to the list; the
    // server trusts both.
    Reply registerAppConfiguration(Parcel& data, DispatchContext& ctx) {
        ScopedFrame frame(ctx, "bluetooth.registerAppConfiguration");
        int32_t count;
        try {
            count = data.readInt32("count");
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("bad count: ") + e.what());
        }
        for (int32_t i = 0; i < count; ++i) {
            if (i >= bluetooth::kSlotCount) {
                ctx.crash(ExceptionKind::OutOfBounds,
                          "bluetooth.registerAppConfiguration.init_slots",
                          "slot index " + std::to_string(i) + " of " +
                                  std::to_string(bluetooth::kSlotCount));
            }
            mSlots[static_cast<size_t>(i)].clear();
        }
        for (int32_t i = 0; i < count; ++i) {
            try {
                mSlots[static_cast<size_t>(i)] = data.readString("name");
            } catch (const ParcelError& e) {
                ctx.crash(ExceptionKind::MalformedParcel,
                          "bluetooth.registerAppConfiguration.read_entries",
                          "entry " + std::to_string(i) + ": " + e.what());
            }
        }
        Parcel reply;
        reply.writeBool(true);
        return Reply::ok(std::move(reply));
    }

    std::array<std::string, bluetooth::kSlotCount> mSlots;
};

}  // namespace

std::unique_ptr<Service> make_bluetooth_service() {
    return std::make_unique<BluetoothService>();
}

}  // namespace ipcfuzz::services
