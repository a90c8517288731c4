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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gateway/gateway.hpp"
#include "ingestion/config.hpp"
#include "ingestion/transcript.hpp"

namespace apprentice::seg {

struct SegmentSummary {
    std::string goal_name;
    std::string summary;
    std::size_t appearance_index = 0;

    bool operator==(const SegmentSummary&) const = default;
};

struct RetrievedAnchor {
    std::string goal_name;
    std::string sentence_text;  // passage as retrieved
    std::string summary;
    std::vector<std::size_t> matched_indices;
    bool via_similarity = false;
    double similarity = 1.0;

    bool operator==(const RetrievedAnchor&) const = default;
};

struct VideoSegment {
    std::string goal_name;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string summary;
    std::size_t first_index = 0;
    std::size_t last_index = 0;

    // "<goal> - <floor(start_s)>"; identifies the segment across files.
    std::string key() const;
    bool operator==(const VideoSegment&) const = default;
};

std::string segment_key(std::string_view goal, double start_s);

struct SegmentationResult {
    std::vector<SegmentSummary> summaries;
    std::vector<RetrievedAnchor> anchors;
    std::vector<VideoSegment> segments;
    std::vector<std::string> warnings;
};

/// Stage 1: one summary point per goal occurrence, in order of appearance.
/// Points naming goals that are not enabled are dropped with a warning.
std::vector<SegmentSummary> summarize(const ingest::Transcript& transcript,
                                      const std::vector<const ingest::LearningGoalDef*>& goals,
                                      std::string_view topic, gateway::Gateway& gw,
                                      std::vector<std::string>* warnings = nullptr);

/// Stage 2: maps each summary to transcript sentences. The gateway proposes a
/// passage per summary; it is matched by whitespace/case-normalized substring
/// first, then by the most similar single sentence above `similarity_floor`.
std::vector<RetrievedAnchor> retrieve(const std::vector<SegmentSummary>& summaries,
                                      const ingest::Transcript& transcript, gateway::Gateway& gw,
                                      double similarity_floor, std::vector<std::string>* warnings = nullptr);

/// Resolves one passage against the transcript; exposed for testing.
RetrievedAnchor resolve_passage(const SegmentSummary& summary, std::string_view passage,
                                const ingest::Transcript& transcript, gateway::Gateway& gw,
                                double similarity_floor, std::size_t search_from = 0);

/// Stage 3: turns anchors into time ranges, merges same-goal neighbours and
/// truncates cross-goal overlaps. Output is sorted by start time.
std::vector<VideoSegment> rearrange(const std::vector<RetrievedAnchor>& anchors,
                                    const ingest::Transcript& transcript,
                                    std::vector<std::string>* warnings = nullptr);

SegmentationResult segment_video(const ingest::Transcript& transcript, const ingest::ExpertConfig& config,
                                 gateway::Gateway& gw);

// Windows of roughly `chunk_seconds` by sentence start time.
std::vector<ingest::Transcript> chunk_transcript(const ingest::Transcript& transcript, double chunk_seconds);

// Array of {category, start, end}; detailed adds summary and sentence range.
nlohmann::ordered_json to_json(const std::vector<VideoSegment>& segments, bool detailed = false);

// Reads segment files; missing sentence ranges are recovered from the
// transcript by time.
std::vector<VideoSegment> parse_segments(const nlohmann::json& doc, const ingest::Transcript& transcript);

}  // namespace apprentice::seg
