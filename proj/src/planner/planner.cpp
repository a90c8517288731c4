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
#include "planner/planner.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace apprentice::planner {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Rationale r) noexcept {
    switch (r) {
        case Rationale::GlobalFirst: return "global_first";
        case Rationale::Complexity: return "complexity";
        case Rationale::Diversity: return "diversity";
        case Rationale::FadeOut: return "fade_out";
    }
    return "complexity";
}

std::optional<Rationale> parse_rationale(std::string_view s) noexcept {
    for (auto r : {Rationale::GlobalFirst, Rationale::Complexity, Rationale::Diversity, Rationale::FadeOut})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

MoveUsage MoveHistory::usage(const std::string& goal, MentorMove move) const {
    const auto g = goals.find(goal);
    if (g == goals.end()) return {};
    const auto m = g->second.find(move);
    return m == g->second.end() ? MoveUsage{} : m->second;
}

void MoveHistory::record(const std::string& goal, MentorMove move) {
    auto& u = goals[goal][move];
    ++u.count;
    u.last_used = ++tick;
}

PlannerOptions options_from(const ingest::ExpertConfig& config) {
    PlannerOptions o;
    o.thresholds = config.thresholds;
    o.default_mastery = config.bkt_defaults.p_mastery;
    for (const auto& t : config.action_set)
        if (t.move == MentorMove::Modeling) o.modeling_domains.insert(t.domain);
    return o;
}

int move_priority(MentorMove m) noexcept {
    switch (m) {
        case MentorMove::Scaffolding: return 0;
        case MentorMove::Coaching: return 1;
        case MentorMove::Articulation: return 2;
        case MentorMove::Modeling: return 3;
        case MentorMove::Reflection: return 4;
        case MentorMove::Exploration: return 5;
    }
    return 5;
}

MentorMove least_recently_used(const std::vector<MentorMove>& candidates, const MoveHistory& history,
                               const std::string& goal) {
    if (candidates.empty()) fail(ErrorCode::Internal, "no candidate moves");
    return *std::min_element(candidates.begin(), candidates.end(), [&](MentorMove a, MentorMove b) {
        const auto ua = history.usage(goal, a).last_used;
        const auto ub = history.usage(goal, b).last_used;
        return ua != ub ? ua < ub : move_priority(a) < move_priority(b);
    });
}

namespace {

void erase(std::vector<MentorMove>& v, MentorMove m) { v.erase(std::remove(v.begin(), v.end(), m), v.end()); }

MovePlan plan_item(const knowledge::KnowledgeItem& item, double p, bool last_in_segment, const MoveHistory& history,
                   const PlannerOptions& o) {
    MovePlan plan;
    plan.knowledge_id = item.id;
    const bool fading = p > o.thresholds.fade;
    const bool modeling = o.modeling_domains.contains(item.domain);
    const bool early = item.order_index <= 1;

    auto choose = [&](std::vector<MentorMove> candidates) {
        if (!modeling) erase(candidates, MentorMove::Modeling);
        if (candidates.size() > 1) plan.rationale.insert(Rationale::Diversity);
        plan.moves.push_back(least_recently_used(candidates, history, item.goal_name));
    };

    if (item.domain == Domain::ConceptRelated) {
        if (early) {
            plan.rationale.insert(Rationale::GlobalFirst);
            if (fading) {
                plan.rationale.insert(Rationale::FadeOut);
                choose({MentorMove::Modeling, MentorMove::Coaching});
            } else {
                choose({MentorMove::Scaffolding, MentorMove::Modeling});
            }
        } else {
            plan.rationale.insert(Rationale::Complexity);
            std::vector<MentorMove> c = {MentorMove::Scaffolding, MentorMove::Coaching, MentorMove::Articulation};
            if (fading) {
                plan.rationale.insert(Rationale::FadeOut);
                erase(c, MentorMove::Scaffolding);
            }
            choose(c);
        }
        if (plan.moves.back() == MentorMove::Coaching) plan.moves.push_back(MentorMove::Reflection);
        return plan;
    }

    if (item.kind == KnowledgeKind::Declarative) {
        if (early) plan.rationale.insert(Rationale::GlobalFirst);
        std::vector<MentorMove> c = {MentorMove::Scaffolding, early ? MentorMove::Modeling : MentorMove::Articulation};
        if (fading) {
            plan.rationale.insert(Rationale::FadeOut);
            erase(c, MentorMove::Scaffolding);
        }
        if (!modeling) erase(c, MentorMove::Modeling);
        if (c.empty()) c.push_back(MentorMove::Articulation);
        choose(c);
    } else {
        plan.rationale.insert(Rationale::Complexity);
        if (p < o.thresholds.weak) {
            plan.moves = {MentorMove::Scaffolding};
        } else if (p <= o.thresholds.strong) {
            plan.moves = {MentorMove::Scaffolding, MentorMove::Coaching};
        } else {
            plan.rationale.insert(Rationale::FadeOut);
            plan.moves = {MentorMove::Coaching};
        }
    }
    if (last_in_segment) plan.moves.push_back(MentorMove::Reflection);
    return plan;
}

}  // namespace

std::vector<MovePlan> plan_segment(const std::vector<knowledge::KnowledgeItem>& items, const MasteryMap& mastery,
                                   MoveHistory& history, const PlannerOptions& options) {
    std::vector<MovePlan> plans;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        if (i > 0 && item.segment_key != items[0].segment_key)
            fail(ErrorCode::InvalidArgument, "plan_segment got items from more than one segment");
        const auto it = mastery.find(item.id);
        const double p = it == mastery.end() ? options.default_mastery : it->second;
        if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "mastery for " + item.id + " is outside [0,1]");
        auto plan = plan_item(item, p, i + 1 == items.size(), history, options);
        for (auto m : plan.moves) history.record(item.goal_name, m);
        plans.push_back(std::move(plan));
    }
    return plans;
}

std::vector<MovePlan> plan(const std::vector<knowledge::KnowledgeItem>& items, const MasteryMap& mastery,
                           MoveHistory& history, const PlannerOptions& options) {
    std::vector<MovePlan> out;
    std::size_t begin = 0;
    while (begin < items.size()) {
        auto end = begin + 1;
        while (end < items.size() && items[end].segment_key == items[begin].segment_key) ++end;
        const std::vector<knowledge::KnowledgeItem> run(items.begin() + static_cast<std::ptrdiff_t>(begin),
                                                        items.begin() + static_cast<std::ptrdiff_t>(end));
        auto plans = plan_segment(run, mastery, history, options);
        out.insert(out.end(), plans.begin(), plans.end());
        begin = end;
    }
    return out;
}

ordered_json to_json(const std::vector<MovePlan>& plans) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : plans) {
        ordered_json j;
        j["knowledge_id"] = p.knowledge_id;
        j["moves"] = ordered_json::array();
        for (auto m : p.moves) j["moves"].push_back(to_string(m));
        j["rationale"] = ordered_json::array();
        for (auto r : p.rationale) j["rationale"].push_back(to_string(r));
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<MovePlan> parse_plans(const json& doc) {
    if (!doc.is_array()) fail(ErrorCode::Validation, "plans file must be an array");
    std::vector<MovePlan> out;
    for (const auto& j : doc) {
        MovePlan p;
        if (!j.contains("knowledge_id") || !j["knowledge_id"].is_string() || !j.contains("moves") ||
            !j["moves"].is_array())
            fail(ErrorCode::Validation, "plan entries need 'knowledge_id' and 'moves'");
        p.knowledge_id = j["knowledge_id"].get<std::string>();
        for (const auto& m : j["moves"]) {
            const auto move = m.is_string() ? parse_move(m.get<std::string>()) : std::nullopt;
            if (!move) fail(ErrorCode::Validation, "unknown move in plan for " + p.knowledge_id);
            p.moves.push_back(*move);
        }
        if (p.moves.empty() || p.moves.size() > 3)
            fail(ErrorCode::Validation, "plan for " + p.knowledge_id + " must have 1 to 3 moves");
        if (j.contains("rationale") && j["rationale"].is_array())
            for (const auto& r : j["rationale"])
                if (auto tag = r.is_string() ? parse_rationale(r.get<std::string>()) : std::nullopt)
                    p.rationale.insert(*tag);
        out.push_back(std::move(p));
    }
    return out;
}

ordered_json to_json(const MoveHistory& history) {
    ordered_json goals = ordered_json::object();
    for (const auto& [goal, moves] : history.goals) {
        ordered_json g = ordered_json::object();
        for (const auto& [move, u] : moves) g[std::string(to_string(move))] = {{"count", u.count}, {"last_used", u.last_used}};
        goals[goal] = std::move(g);
    }
    return {{"tick", history.tick}, {"goals", goals}};
}

MoveHistory parse_history(const json& doc) {
    MoveHistory h;
    if (doc.is_null()) return h;
    if (!doc.is_object()) fail(ErrorCode::Validation, "history must be an object");
    h.tick = doc.value("tick", std::uint64_t{0});
    if (doc.contains("goals"))
        for (const auto& [goal, moves] : doc["goals"].items())
            for (const auto& [name, u] : moves.items()) {
                const auto move = parse_move(name);
                if (!move) fail(ErrorCode::Validation, "unknown move '" + name + "' in history");
                h.goals[goal][*move] = {u.value("count", 0u), u.value("last_used", std::uint64_t{0})};
            }
    return h;
}

}  // namespace apprentice::planner
