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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace apprentice::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split_whitespace(std::string_view s);
// Collapses every whitespace run to one space and trims the ends.
std::string normalize_whitespace(std::string_view s);
std::string replace_all(std::string s, std::string_view from, std::string_view to);
bool contains(std::string_view haystack, std::string_view needle) noexcept;

// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

// Lower-cased alphanumeric/underscore word tokens.
std::vector<std::string> word_tokens(std::string_view s);

// Code identifiers (letters, digits, '_' and '.', not starting with a digit).
std::vector<std::string> identifiers(std::string_view code);

// Tokens wrapped in backticks or single quotes, e.g. `fct_reorder` or 'Median'.
std::vector<std::string> quoted_tokens(std::string_view s);

// Placeholders of the form {name}; names may contain letters, digits, '-' and '_'.
std::vector<std::string> placeholders(std::string_view prompt);

}  // namespace apprentice::text

namespace apprentice::fsutil {

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling, fsyncs, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace apprentice::fsutil
