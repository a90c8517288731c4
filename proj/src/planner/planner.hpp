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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "ingestion/config.hpp"
#include "knowledge/knowledge.hpp"

namespace apprentice::planner {

enum class Rationale { GlobalFirst, Complexity, Diversity, FadeOut };

std::string_view to_string(Rationale r) noexcept;
std::optional<Rationale> parse_rationale(std::string_view s) noexcept;

struct MovePlan {
    std::string knowledge_id;
    std::vector<MentorMove> moves;
    std::set<Rationale> rationale;

    bool operator==(const MovePlan&) const = default;
};

struct MoveUsage {
    std::uint32_t count = 0;
    std::uint64_t last_used = 0;  // 0: never

    bool operator==(const MoveUsage&) const = default;
};

/// Per-goal record of emitted moves. Caller-owned; plan() updates it.
struct MoveHistory {
    std::map<std::string, std::map<MentorMove, MoveUsage>> goals;
    std::uint64_t tick = 0;

    MoveUsage usage(const std::string& goal, MentorMove move) const;
    void record(const std::string& goal, MentorMove move);
    bool operator==(const MoveHistory&) const = default;
};

struct PlannerOptions {
    ingest::Thresholds thresholds;
    double default_mastery = 0.1;
    // Domains whose action set offers a Modeling template.
    std::set<Domain> modeling_domains;
};

PlannerOptions options_from(const ingest::ExpertConfig& config);

// Fixed preference used to break LRU ties.
int move_priority(MentorMove m) noexcept;

/// Picks the least recently used candidate for `goal`; ties go to the
/// earlier entry in the priority order.
MentorMove least_recently_used(const std::vector<MentorMove>& candidates, const MoveHistory& history,
                               const std::string& goal);

using MasteryMap = std::map<std::string, double>;

/// Plans every item of one segment. `items` must share a segment key and be
/// ordered by order_index.
std::vector<MovePlan> plan_segment(const std::vector<knowledge::KnowledgeItem>& items, const MasteryMap& mastery,
                                   MoveHistory& history, const PlannerOptions& options);

/// Plans consecutive runs of same-segment items in order.
std::vector<MovePlan> plan(const std::vector<knowledge::KnowledgeItem>& items, const MasteryMap& mastery,
                           MoveHistory& history, const PlannerOptions& options);

nlohmann::ordered_json to_json(const std::vector<MovePlan>& plans);
std::vector<MovePlan> parse_plans(const nlohmann::json& doc);

nlohmann::ordered_json to_json(const MoveHistory& history);
MoveHistory parse_history(const nlohmann::json& doc);

}  // namespace apprentice::planner
