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

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace apprentice::ingest {

struct TranscriptSentence {
    std::size_t index = 0;
    std::string text;
    double start_s = 0.0;
    double duration_s = 0.0;

    double end_s() const noexcept { return start_s + duration_s; }
    bool operator==(const TranscriptSentence&) const = default;
};

using Transcript = std::vector<TranscriptSentence>;

struct SourceOptions {
    std::filesystem::path base_dir;  // relative paths resolve against this
    bool offline = false;            // forbids http(s) sources
};

// Reads a local path, file:// URI, or (unless offline) an http(s) URL.
std::string fetch_source(std::string_view source, const SourceOptions& options);

// Parses a JSON array of {text, start, duration}. Output is stably sorted by
// start and re-indexed from 0.
Transcript parse_transcript(std::string_view json_text);

Transcript load_transcript(std::string_view source, const SourceOptions& options = {});

// Space-joined text of sentences [first, last].
std::string join_text(const Transcript& transcript, std::size_t first, std::size_t last);

}  // namespace apprentice::ingest
