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

#include <memory>

#include "ipcfuzz/router.hpp"

namespace ipcfuzz::services {

std::unique_ptr<Service> make_queue_service();
std::unique_ptr<Service> make_audio_service();
std::unique_ptr<Service> make_bluetooth_service();
std::unique_ptr<Service> make_view_service();
std::unique_ptr<Service> make_graphics_service();
std::unique_ptr<Service> make_activity_service();

}  // namespace ipcfuzz::services
