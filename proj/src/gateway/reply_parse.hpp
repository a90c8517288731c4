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

#include <string_view>

#include <json.hpp>

namespace apprentice::gateway {

/// Parses the list-shaped replies language models produce: JSON, or
/// Python-style literals with single quotes and tuples. Surrounding prose and
/// code fences are skipped; the first top-level '[' starts the value.
/// Unquoted apostrophes inside quoted strings are tolerated: a quote only
/// closes a string when followed by a delimiter.
/// Throws ParseError (carrying the raw reply) when no list can be read.
nlohmann::json parse_list_reply(std::string_view reply);

}  // namespace apprentice::gateway
