/*
 * Copyright (c) 2026 The Apprentice Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <string>

#include <json.hpp>

namespace apprentice {

// Indented JSON with keys in stored order. Arrays holding only scalars stay on
// one line ("[\"a\", \"b\"]"); arrays holding objects or arrays are expanded.
// No trailing newline.
std::string canonical_dump(const nlohmann::ordered_json& value, int indent = 4);

}  // namespace apprentice
