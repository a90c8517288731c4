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
#include "ingestion/config.hpp"

#include <algorithm>
#include <set>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& what) { fail(ErrorCode::Validation, "config: " + what); }

const json& require(const json& obj, const char* field, const std::string& where) {
    if (!obj.contains(field)) invalid(where + ": missing field '" + field + "'");
    return obj.at(field);
}

std::string get_string(const json& obj, const char* field, const std::string& where,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(field)) {
        if (fallback) return *fallback;
        invalid(where + ": missing field '" + field + "'");
    }
    const auto& v = obj.at(field);
    if (!v.is_string()) invalid(where + ": '" + field + "' must be a string");
    return v.get<std::string>();
}

double get_number(const json& obj, const char* field, const std::string& where, double fallback) {
    if (!obj.contains(field)) return fallback;
    const auto& v = obj.at(field);
    if (!v.is_number()) invalid(where + ": '" + field + "' must be a number");
    return v.get<double>();
}

double get_probability(const json& obj, const char* field, const std::string& where, double fallback) {
    const double p = get_number(obj, field, where, fallback);
    if (!(p >= 0.0 && p <= 1.0)) invalid(where + ": '" + field + "' must lie in [0,1]");
    return p;
}

bool get_bool(const json& obj, const char* field, const std::string& where, bool fallback) {
    if (!obj.contains(field)) return fallback;
    const auto& v = obj.at(field);
    if (!v.is_boolean()) invalid(where + ": '" + field + "' must be a boolean");
    return v.get<bool>();
}

LearningGoalDef parse_goal(const json& j, std::size_t i) {
    const std::string where = "goals[" + std::to_string(i) + "]";
    if (!j.is_object()) invalid(where + ": must be an object");
    LearningGoalDef g;
    g.name = get_string(j, "name", where);
    g.description = get_string(j, "description", where, std::string{});
    g.enabled = get_bool(j, "enabled", where, true);
    const double hint = get_number(j, "order_hint", where, static_cast<double>(i));
    if (hint < 0) invalid(where + ": 'order_hint' must be non-negative");
    g.order_hint = static_cast<std::size_t>(hint);
    if (j.contains("domain")) {
        auto d = parse_domain(get_string(j, "domain", where));
        if (!d) invalid(where + ": unknown domain");
        g.domain = d;
    }
    return g;
}

GatewaySettings parse_gateway(const json& j) {
    const std::string where = "gateway";
    GatewaySettings g;
    if (!j.is_object()) invalid("gateway must be an object");
    const auto backend = get_string(j, "backend", where, std::string("mock"));
    if (backend == "mock")
        g.backend = GatewayBackend::Mock;
    else if (backend == "live")
        g.backend = GatewayBackend::Live;
    else
        invalid("gateway: backend must be 'mock' or 'live'");
    g.base_url = get_string(j, "base_url", where, g.base_url);
    g.api_key_env = get_string(j, "api_key_env", where, g.api_key_env);
    g.model = get_string(j, "model", where, g.model);
    g.embedding_model = get_string(j, "embedding_model", where, g.embedding_model);
    if (j.contains("stage_models")) {
        if (!j["stage_models"].is_object()) invalid("gateway: stage_models must be an object");
        g.stage_models.clear();
        for (const auto& [k, v] : j["stage_models"].items()) {
            if (!v.is_string()) invalid("gateway: stage_models values must be strings");
            g.stage_models[k] = v.get<std::string>();
        }
    }
    g.temperature = get_number(j, "temperature", where, g.temperature);
    if (g.temperature < 0.0 || g.temperature > 2.0) invalid("gateway: temperature must lie in [0,2]");
    g.max_tokens = static_cast<int>(get_number(j, "max_tokens", where, g.max_tokens));
    g.history_token_budget =
        static_cast<int>(get_number(j, "history_token_budget", where, g.history_token_budget));
    if (g.max_tokens <= 0 || g.history_token_budget <= 0)
        invalid("gateway: token limits must be positive");
    return g;
}

}  // namespace

ActionTemplate parse_action_template(const json& j) {
    const std::string where = "action template";
    if (!j.is_object()) invalid(where + " must be an object");
    ActionTemplate t;
    const auto move = get_string(j, "move", where);
    const auto m = parse_move(move);
    if (!m) invalid(where + ": unknown move '" + move + "'");
    t.move = *m;
    const auto domain = get_string(j, "domain", where);
    const auto d = parse_domain(domain);
    if (!d) invalid(where + ": unknown domain '" + domain + "'");
    t.domain = *d;
    if (j.contains("knowledge_kind") && !j["knowledge_kind"].is_null()) {
        auto k = parse_knowledge_kind(get_string(j, "knowledge_kind", where));
        if (!k) invalid(where + ": unknown knowledge_kind");
        t.knowledge_kind = k;
    }
    t.action = get_string(j, "action", where, std::string{});
    const auto interaction = get_string(j, "interaction", where);
    const auto i = parse_interaction(interaction);
    if (!i) invalid(where + ": unknown interaction '" + interaction + "'");
    t.interaction = *i;
    t.prompt = get_string(j, "prompt", where, std::string{});
    if (j.contains("parameters")) {
        const auto& params = j["parameters"];
        if (!params.is_array()) invalid(where + ": 'parameters' must be an array");
        for (const auto& p : params) {
            if (!p.is_string()) invalid(where + ": parameter names must be strings");
            t.parameters.push_back(p.get<std::string>());
        }
    } else {
        t.parameters = text::placeholders(t.prompt);
    }
    for (const auto& ph : text::placeholders(t.prompt))
        if (std::find(t.parameters.begin(), t.parameters.end(), ph) == t.parameters.end())
            invalid(where + " (" + std::string(to_string(t.move)) + "): placeholder {" + ph +
                    "} is not declared in parameters");
    if (j.contains("need_response") && !j["need_response"].is_null()) {
        if (!j["need_response"].is_boolean()) invalid(where + ": 'need_response' must be a boolean");
        t.need_response = j["need_response"].get<bool>();
    }
    return t;
}

ordered_json to_json(const ActionTemplate& t) {
    ordered_json j;
    j["move"] = to_string(t.move);
    j["domain"] = to_string(t.domain);
    if (t.knowledge_kind) j["knowledge_kind"] = to_string(*t.knowledge_kind);
    j["action"] = t.action;
    j["interaction"] = to_identifier(t.interaction);
    j["prompt"] = t.prompt;
    j["parameters"] = t.parameters;
    if (t.need_response) j["need_response"] = *t.need_response;
    return j;
}

std::vector<MentorMove> required_moves() {
    return {MentorMove::Scaffolding, MentorMove::Coaching, MentorMove::Articulation, MentorMove::Reflection};
}

std::vector<Domain> domains_of(VideoType type) {
    switch (type) {
        case VideoType::ConceptRelated: return {Domain::ConceptRelated};
        case VideoType::ProgrammingRelated: return {Domain::ProgrammingRelated};
        case VideoType::Mixed: return {Domain::ConceptRelated, Domain::ProgrammingRelated};
    }
    return {};
}

ExpertConfig parse_config(const json& doc) {
    if (!doc.is_object()) invalid("document must be a JSON object");
    ExpertConfig c;
    c.topic = get_string(doc, "topic", "config");
    const auto vt = get_string(doc, "video_type", "config");
    const auto parsed_vt = parse_video_type(vt);
    if (!parsed_vt) invalid("unknown video_type '" + vt + "'");
    c.video_type = *parsed_vt;
    c.kernel_language = get_string(doc, "kernel_language", "config", std::string{});
    c.transcript_source = get_string(doc, "transcript_source", "config", std::string{});
    c.code_source = get_string(doc, "code_source", "config", std::string{});

    const auto& goals = require(doc, "goals", "config");
    if (!goals.is_array()) invalid("'goals' must be an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < goals.size(); ++i) {
        auto g = parse_goal(goals[i], i);
        if (!names.insert(g.name).second) invalid("duplicate goal name '" + g.name + "'");
        if (g.enabled && text::trim(g.description).empty())
            invalid("enabled goal '" + g.name + "' needs a description");
        if (g.enabled && c.video_type == VideoType::Mixed && !g.domain)
            invalid("goal '" + g.name + "' needs a domain in a mixed video");
        c.goals.push_back(std::move(g));
    }
    if (std::none_of(c.goals.begin(), c.goals.end(), [](const auto& g) { return g.enabled; }))
        invalid("at least one goal must be enabled");

    const auto& actions = require(doc, "action_set", "config");
    if (!actions.is_array()) invalid("'action_set' must be an array");
    if (actions.empty()) invalid("'action_set' is empty");
    for (const auto& a : actions) c.action_set.push_back(parse_action_template(a));

    if (doc.contains("bkt_defaults")) {
        const auto& b = doc["bkt_defaults"];
        if (!b.is_object()) invalid("'bkt_defaults' must be an object");
        c.bkt_defaults.p_mastery = get_probability(b, "p_mastery", "bkt_defaults", c.bkt_defaults.p_mastery);
        c.bkt_defaults.p_transit = get_probability(b, "p_transit", "bkt_defaults", c.bkt_defaults.p_transit);
        c.bkt_defaults.p_slip = get_probability(b, "p_slip", "bkt_defaults", c.bkt_defaults.p_slip);
        c.bkt_defaults.p_guess = get_probability(b, "p_guess", "bkt_defaults", c.bkt_defaults.p_guess);
    }
    if (!(c.bkt_defaults.p_slip + c.bkt_defaults.p_guess < 1.0))
        invalid("bkt_defaults: p_slip + p_guess must be below 1");

    if (doc.contains("thresholds")) {
        const auto& t = doc["thresholds"];
        if (!t.is_object()) invalid("'thresholds' must be an object");
        c.thresholds.weak = get_probability(t, "weak", "thresholds", c.thresholds.weak);
        c.thresholds.fade = get_probability(t, "fade", "thresholds", c.thresholds.fade);
        c.thresholds.strong = get_probability(t, "strong", "thresholds", c.thresholds.strong);
    }
    if (!(c.thresholds.weak < c.thresholds.fade && c.thresholds.fade < c.thresholds.strong))
        invalid("thresholds must satisfy weak < fade < strong");

    c.similarity_threshold = get_probability(doc, "similarity_threshold", "config", c.similarity_threshold);
    c.retrieve_similarity_floor =
        get_probability(doc, "retrieve_similarity_floor", "config", c.retrieve_similarity_floor);
    const double max_items = get_number(doc, "max_knowledge_items", "config", 4.0);
    if (max_items < 1) invalid("'max_knowledge_items' must be at least 1");
    c.max_knowledge_items = static_cast<std::size_t>(max_items);
    c.chunk_seconds = get_number(doc, "chunk_seconds", "config", 0.0);
    if (c.chunk_seconds < 0) invalid("'chunk_seconds' must be non-negative");
    if (doc.contains("session_seed")) {
        if (!doc["session_seed"].is_number_unsigned()) invalid("'session_seed' must be a non-negative integer");
        c.session_seed = doc["session_seed"].get<std::uint64_t>();
    }
    if (doc.contains("gateway")) c.gateway = parse_gateway(doc["gateway"]);

    std::set<Domain> used;
    for (const auto* g : c.enabled_goals()) used.insert(c.domain_of(*g));
    for (auto domain : used)
        for (auto move : required_moves()) {
            const bool covered = std::any_of(c.action_set.begin(), c.action_set.end(), [&](const auto& t) {
                return t.move == move && t.domain == domain;
            });
            if (!covered)
                invalid("action_set has no template for (" + std::string(to_string(move)) + ", " +
                        std::string(to_string(domain)) + ")");
        }
    return c;
}

ExpertConfig parse_config_text(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        invalid(std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExpertConfig load_config(const std::filesystem::path& path) {
    auto c = parse_config_text(fsutil::read_file(path));
    c.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return c;
}

ordered_json to_json(const ExpertConfig& c) {
    ordered_json j;
    j["topic"] = c.topic;
    j["video_type"] = to_string(c.video_type);
    j["kernel_language"] = c.kernel_language;
    j["transcript_source"] = c.transcript_source;
    j["code_source"] = c.code_source;
    j["goals"] = ordered_json::array();
    for (const auto& g : c.goals) {
        ordered_json gj;
        gj["name"] = g.name;
        gj["description"] = g.description;
        gj["enabled"] = g.enabled;
        gj["order_hint"] = g.order_hint;
        if (g.domain) gj["domain"] = to_string(*g.domain);
        j["goals"].push_back(std::move(gj));
    }
    j["action_set"] = ordered_json::array();
    for (const auto& t : c.action_set) j["action_set"].push_back(to_json(t));
    j["bkt_defaults"] = {{"p_mastery", c.bkt_defaults.p_mastery},
                         {"p_transit", c.bkt_defaults.p_transit},
                         {"p_slip", c.bkt_defaults.p_slip},
                         {"p_guess", c.bkt_defaults.p_guess}};
    j["thresholds"] = {{"weak", c.thresholds.weak}, {"fade", c.thresholds.fade}, {"strong", c.thresholds.strong}};
    j["similarity_threshold"] = c.similarity_threshold;
    j["retrieve_similarity_floor"] = c.retrieve_similarity_floor;
    j["max_knowledge_items"] = c.max_knowledge_items;
    j["chunk_seconds"] = c.chunk_seconds;
    j["session_seed"] = c.session_seed;
    ordered_json g;
    g["backend"] = c.gateway.backend == GatewayBackend::Mock ? "mock" : "live";
    g["base_url"] = c.gateway.base_url;
    g["api_key_env"] = c.gateway.api_key_env;
    g["model"] = c.gateway.model;
    g["embedding_model"] = c.gateway.embedding_model;
    g["stage_models"] = c.gateway.stage_models;
    g["temperature"] = c.gateway.temperature;
    g["max_tokens"] = c.gateway.max_tokens;
    g["history_token_budget"] = c.gateway.history_token_budget;
    j["gateway"] = std::move(g);
    return j;
}

bool ExpertConfig::operator==(const ExpertConfig& o) const {
    return topic == o.topic && video_type == o.video_type && kernel_language == o.kernel_language &&
           transcript_source == o.transcript_source && code_source == o.code_source && goals == o.goals &&
           action_set == o.action_set && bkt_defaults == o.bkt_defaults && thresholds == o.thresholds &&
           similarity_threshold == o.similarity_threshold &&
           retrieve_similarity_floor == o.retrieve_similarity_floor &&
           max_knowledge_items == o.max_knowledge_items && chunk_seconds == o.chunk_seconds &&
           session_seed == o.session_seed && gateway == o.gateway;
}

std::vector<const LearningGoalDef*> ExpertConfig::enabled_goals() const {
    std::vector<const LearningGoalDef*> out;
    for (const auto& g : goals)
        if (g.enabled) out.push_back(&g);
    return out;
}

const LearningGoalDef* ExpertConfig::find_goal(std::string_view name) const {
    for (const auto& g : goals)
        if (g.name == name) return &g;
    return nullptr;
}

Domain ExpertConfig::domain_of(const LearningGoalDef& goal) const {
    if (goal.domain) return *goal.domain;
    return video_type == VideoType::ConceptRelated ? Domain::ConceptRelated : Domain::ProgrammingRelated;
}

}  // namespace apprentice::ingest
