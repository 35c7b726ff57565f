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

#include <deque>

#include "ipcfuzz/services.hpp"
#include "service_impls.hpp"

namespace ipcfuzz::services {

namespace {

// Validates everything and never faults.
class QueueService : public Service {
public:
    Reply onTransact(MethodCode code, Parcel& data, DispatchContext& ctx) override {
        ScopedFrame frame(ctx, "queue.onTransact");
        try {
            switch (code) {
                case queue::kAdd: return add(data);
                case queue::kPeek: return front(false);
                case queue::kPoll:
                case queue::kRemove: return front(true);
                default: return Reply::rejected("unknown transaction code");
            }
        } catch (const ParcelError& e) {
            return Reply::rejected(std::string("malformed parcel: ") + e.what());
        }
    }

private:
    Reply add(Parcel& data) {
        std::string name = data.readString("name");
        if (name.size() > queue::kMaxNameBytes) {
            // Caught server-side and written back as an exception.
            return Reply::handledFault("IllegalStateException: name longer than " +
                                       std::to_string(queue::kMaxNameBytes) + " bytes");
        }
        if (mItems.size() >= queue::kCapacity) return Reply::rejected("queue full");
        mItems.push_back(std::move(name));
        Parcel reply;
        reply.writeBool(true);
        return Reply::ok(std::move(reply));
    }

    Reply front(bool pop) {
        if (mItems.empty()) return Reply::rejected("empty queue");
        Parcel reply;
        reply.writeString(mItems.front());
        if (pop) mItems.pop_front();
        return Reply::ok(std::move(reply));
    }

    std::deque<std::string> mItems;
};

}  // namespace

std::unique_ptr<Service> make_queue_service() {
    return std::make_unique<QueueService>();
}

}  // namespace ipcfuzz::services
