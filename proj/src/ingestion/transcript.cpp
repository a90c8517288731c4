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
#include "ingestion/transcript.hpp"

#include <algorithm>

#include <json.hpp>

#include "core/error.hpp"

namespace apprentice::ingest {

using nlohmann::json;

namespace {

[[noreturn]] void bad_entry(std::size_t i, const std::string& what) {
    fail(ErrorCode::Validation, "transcript entry " + std::to_string(i) + ": " + what);
}

}  // namespace

Transcript parse_transcript(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Validation, std::string("transcript is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) fail(ErrorCode::Validation, "transcript must be a JSON array");

    Transcript out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        if (!entry.is_object()) bad_entry(i, "not an object");
        for (const char* field : {"text", "start", "duration"})
            if (!entry.contains(field)) bad_entry(i, std::string("missing field '") + field + "'");
        if (!entry["text"].is_string()) bad_entry(i, "'text' must be a string");
        if (!entry["start"].is_number()) bad_entry(i, "'start' must be a number");
        if (!entry["duration"].is_number()) bad_entry(i, "'duration' must be a number");
        TranscriptSentence s;
        s.text = entry["text"].get<std::string>();
        s.start_s = entry["start"].get<double>();
        s.duration_s = entry["duration"].get<double>();
        if (!(s.start_s >= 0.0)) bad_entry(i, "negative start");
        if (!(s.duration_s > 0.0)) bad_entry(i, "duration must be positive");
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].index = i;
    return out;
}

Transcript load_transcript(std::string_view source, const SourceOptions& options) {
    return parse_transcript(fetch_source(source, options));
}

std::string join_text(const Transcript& transcript, std::size_t first, std::size_t last) {
    std::string out;
    for (std::size_t i = first; i <= last && i < transcript.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += transcript[i].text;
    }
    return out;
}

}  // namespace apprentice::ingest
