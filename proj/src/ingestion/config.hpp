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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"

namespace apprentice::ingest {

struct LearningGoalDef {
    std::string name;
    std::string description;  // one-shot definitional example
    bool enabled = true;
    std::size_t order_hint = 0;
    // Knowledge domain of this goal's segments. Required only for mixed videos;
    // otherwise it follows the video type.
    std::optional<Domain> domain;

    bool operator==(const LearningGoalDef&) const = default;
};

/// Expert-authored template mapping one mentor move to an action, an
/// interaction and a prompt with {parameter} placeholders.
struct ActionTemplate {
    MentorMove move = MentorMove::Scaffolding;
    Domain domain = Domain::ProgrammingRelated;
    std::optional<KnowledgeKind> knowledge_kind;  // restricts the template to one kind
    std::string action;
    Interaction interaction = Interaction::PlainText;
    std::string prompt;  // empty: derived from the interaction and move definition
    std::vector<std::string> parameters;
    std::optional<bool> need_response;  // empty: derived from the interaction

    bool operator==(const ActionTemplate&) const = default;
};

struct BktParams {
    double p_mastery = 0.1;
    double p_transit = 0.1;
    double p_slip = 0.1;
    double p_guess = 0.2;

    bool operator==(const BktParams&) const = default;
};

struct Thresholds {
    double weak = 0.3;
    double fade = 0.5;
    double strong = 0.7;

    bool operator==(const Thresholds&) const = default;
};

enum class GatewayBackend { Mock, Live };

struct GatewaySettings {
    GatewayBackend backend = GatewayBackend::Mock;
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "APPRENTICE_API_KEY";
    std::string model = "gpt-4";
    std::string embedding_model = "text-embedding-3-small";
    // Per-stage model override; segmentation defaults to the long-context model.
    std::map<std::string, std::string> stage_models = {{"segmentation", "gpt-4-32k"}};
    double temperature = 0.2;
    int max_tokens = 1024;
    int history_token_budget = 3000;

    bool operator==(const GatewaySettings&) const = default;
};

struct ExpertConfig {
    std::string topic;
    VideoType video_type = VideoType::ProgrammingRelated;
    std::string kernel_language;
    std::string transcript_source;
    std::string code_source;
    std::vector<LearningGoalDef> goals;
    std::vector<ActionTemplate> action_set;
    BktParams bkt_defaults;
    Thresholds thresholds;
    double similarity_threshold = 0.80;
    double retrieve_similarity_floor = 0.60;
    std::size_t max_knowledge_items = 4;
    double chunk_seconds = 0.0;  // 0 disables pre-splitting before summarize
    std::uint64_t session_seed = 7;
    GatewaySettings gateway;

    // Directory the config was loaded from; not serialized.
    std::filesystem::path base_dir;

    bool operator==(const ExpertConfig& other) const;

    std::vector<const LearningGoalDef*> enabled_goals() const;
    const LearningGoalDef* find_goal(std::string_view name) const;
    Domain domain_of(const LearningGoalDef& goal) const;
};

ExpertConfig parse_config(const nlohmann::json& doc);
ExpertConfig parse_config_text(std::string_view json_text);
ExpertConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const ExpertConfig& config);

nlohmann::ordered_json to_json(const ActionTemplate& t);
ActionTemplate parse_action_template(const nlohmann::json& j);

/// Moves the action set must cover for every domain the video uses. Modeling
/// is optional: the planner only emits it when a template exists.
std::vector<MentorMove> required_moves();

/// Domains whose knowledge the video can produce.
std::vector<Domain> domains_of(VideoType type);

}  // namespace apprentice::ingest
