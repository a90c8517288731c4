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
#include <doctest.h>

#include <cmath>

#include "core/error.hpp"
#include "planner/planner.hpp"

using namespace apprentice;
using knowledge::KnowledgeItem;
using planner::MoveHistory;
using planner::Rationale;
using M = MentorMove;
using Moves = std::vector<MentorMove>;

namespace {

KnowledgeItem item(std::string segment, std::size_t order, KnowledgeKind kind, Domain domain,
                   std::string goal = "g") {
    KnowledgeItem k;
    k.segment_key = std::move(segment);
    k.order_index = order;
    k.id = k.segment_key + "#" + std::to_string(order);
    k.kind = kind;
    k.domain = domain;
    k.goal_name = std::move(goal);
    return k;
}

planner::PlannerOptions opts(bool modeling = true) {
    planner::PlannerOptions o;
    o.thresholds = {0.3, 0.5, 0.7};
    if (modeling) o.modeling_domains = {Domain::ConceptRelated, Domain::ProgrammingRelated};
    return o;
}

// Moves for a single item planned on its own (so it is last in its segment).
Moves alone(const KnowledgeItem& k, double p, MoveHistory h = {}, bool modeling = true) {
    return planner::plan_segment({k}, {{k.id, p}}, h, opts(modeling)).at(0).moves;
}

// Moves for an item followed by a filler, so no closing Reflection.
Moves not_last(const KnowledgeItem& k, double p, MoveHistory h = {}) {
    auto filler = item(k.segment_key, k.order_index + 1, KnowledgeKind::Declarative, k.domain, k.goal_name);
    return planner::plan_segment({k, filler}, {{k.id, p}}, h, opts()).at(0).moves;
}

MoveHistory used(std::initializer_list<M> moves, const std::string& goal = "g") {
    MoveHistory h;
    for (auto m : moves) h.record(goal, m);
    return h;
}

}  // namespace

TEST_CASE("concept items") {
    const auto first = item("s", 0, KnowledgeKind::Procedural, Domain::ConceptRelated);
    const auto later = item("s", 2, KnowledgeKind::Declarative, Domain::ConceptRelated);

    CHECK(alone(first, 0.1) == Moves{M::Scaffolding});
    CHECK(alone(first, 0.1, used({M::Scaffolding})) == Moves{M::Modeling});
    CHECK(alone(first, 0.1, {}, false) == Moves{M::Scaffolding});
    // Fading: Coaching wins the tie and brings a Reflection.
    CHECK(alone(first, 0.6) == Moves{M::Coaching, M::Reflection});
    CHECK(alone(first, 0.6, used({M::Coaching})) == Moves{M::Modeling});
    // 0.5 is not above the fade threshold.
    CHECK(alone(first, 0.5) == Moves{M::Scaffolding});
    CHECK(alone(first, 0.5000001) == Moves{M::Coaching, M::Reflection});

    CHECK(alone(later, 0.4, used({M::Scaffolding})) == Moves{M::Coaching, M::Reflection});
    CHECK(alone(later, 0.4) == Moves{M::Scaffolding});
    CHECK(alone(later, 0.4, used({M::Scaffolding, M::Coaching})) == Moves{M::Articulation});
    CHECK(alone(later, 0.9, used({M::Coaching})) == Moves{M::Articulation});
    CHECK(alone(later, 0.9, used({M::Articulation})) == Moves{M::Coaching, M::Reflection});
}

TEST_CASE("programming procedural bands") {
    const auto k = item("s", 3, KnowledgeKind::Procedural, Domain::ProgrammingRelated);
    CHECK(not_last(k, 0.0) == Moves{M::Scaffolding});
    CHECK(not_last(k, 0.29) == Moves{M::Scaffolding});
    CHECK(not_last(k, 0.3) == Moves{M::Scaffolding, M::Coaching});
    CHECK(not_last(k, 0.5) == Moves{M::Scaffolding, M::Coaching});
    CHECK(not_last(k, 0.7) == Moves{M::Scaffolding, M::Coaching});
    CHECK(not_last(k, 0.8) == Moves{M::Coaching});
    CHECK(alone(k, 0.8) == Moves{M::Coaching, M::Reflection});
    CHECK(alone(k, 0.1) == Moves{M::Scaffolding, M::Reflection});
    // Usage history does not change the bands.
    CHECK(not_last(k, 0.5, used({M::Scaffolding, M::Coaching})) == Moves{M::Scaffolding, M::Coaching});
}

TEST_CASE("programming declarative items") {
    const auto early = item("s", 0, KnowledgeKind::Declarative, Domain::ProgrammingRelated);
    const auto later = item("s", 2, KnowledgeKind::Declarative, Domain::ProgrammingRelated);
    CHECK(not_last(early, 0.1) == Moves{M::Scaffolding});
    CHECK(not_last(early, 0.1, used({M::Scaffolding})) == Moves{M::Modeling});
    CHECK(not_last(early, 0.9) == Moves{M::Modeling});
    CHECK(alone(early, 0.9, {}, false) == Moves{M::Articulation, M::Reflection});
    CHECK(not_last(later, 0.1, used({M::Scaffolding})) == Moves{M::Articulation});
    CHECK(not_last(later, 0.9) == Moves{M::Articulation});
}

TEST_CASE("rationale tags") {
    MoveHistory h;
    const auto plans = planner::plan_segment(
        {item("s", 0, KnowledgeKind::Procedural, Domain::ConceptRelated),
         item("s", 2, KnowledgeKind::Declarative, Domain::ConceptRelated)},
        {{"s#0", 0.1}, {"s#2", 0.9}}, h, opts());
    CHECK(plans[0].rationale == std::set<Rationale>{Rationale::GlobalFirst, Rationale::Diversity});
    CHECK(plans[1].rationale == std::set<Rationale>{Rationale::Complexity, Rationale::Diversity, Rationale::FadeOut});

    MoveHistory h2;
    const auto solo = planner::plan_segment({item("s", 0, KnowledgeKind::Procedural, Domain::ConceptRelated)},
                                            {{"s#0", 0.1}}, h2, opts(false));
    CHECK(solo[0].rationale == std::set<Rationale>{Rationale::GlobalFirst});
}

TEST_CASE("history is updated move by move and planning is deterministic") {
    const std::vector<KnowledgeItem> items = {
        item("a", 0, KnowledgeKind::Declarative, Domain::ProgrammingRelated, "load"),
        item("a", 1, KnowledgeKind::Procedural, Domain::ProgrammingRelated, "load"),
        item("b", 0, KnowledgeKind::Declarative, Domain::ConceptRelated, "read"),
        item("b", 1, KnowledgeKind::Procedural, Domain::ConceptRelated, "read"),
    };
    const planner::MasteryMap mastery = {{"a#1", 0.5}, {"b#1", 0.2}};
    MoveHistory h1, h2;
    const auto p1 = planner::plan(items, mastery, h1, opts());
    const auto p2 = planner::plan(items, mastery, h2, opts());
    CHECK(p1 == p2);
    CHECK(h1 == h2);

    REQUIRE(p1.size() == 4);
    CHECK(p1[0].moves == Moves{M::Scaffolding});
    CHECK(p1[1].moves == Moves{M::Scaffolding, M::Coaching, M::Reflection});
    CHECK(p1[2].moves == Moves{M::Scaffolding});
    CHECK(p1[3].moves == Moves{M::Modeling});
    CHECK(h1.tick == 6);
    CHECK(h1.usage("load", M::Scaffolding) == planner::MoveUsage{2, 2});
    CHECK(h1.usage("read", M::Modeling) == planner::MoveUsage{1, 6});
    CHECK(h1.usage("read", M::Coaching).last_used == 0);

    // Unlisted items fall back to the default mastery.
    MoveHistory h3;
    auto o = opts();
    o.default_mastery = 0.8;
    CHECK(planner::plan_segment({items[1]}, {}, h3, o)[0].moves == Moves{M::Coaching, M::Reflection});
}

TEST_CASE("LRU tie order") {
    MoveHistory h;
    CHECK(planner::least_recently_used({M::Reflection, M::Modeling, M::Articulation}, h, "g") == M::Articulation);
    h.record("g", M::Articulation);
    h.record("other", M::Modeling);
    CHECK(planner::least_recently_used({M::Reflection, M::Modeling, M::Articulation}, h, "g") == M::Modeling);
    CHECK_THROWS_AS(planner::least_recently_used({}, h, "g"), Error);
}

TEST_CASE("bad input") {
    MoveHistory h;
    const auto a = item("a", 0, KnowledgeKind::Declarative, Domain::ConceptRelated);
    const auto b = item("b", 0, KnowledgeKind::Declarative, Domain::ConceptRelated);
    CHECK_THROWS_AS(planner::plan_segment({a, b}, {}, h, opts()), Error);
    CHECK_THROWS_AS(planner::plan_segment({a}, {{"a#0", 1.5}}, h, opts()), Error);
    CHECK_THROWS_AS(planner::plan_segment({a}, {{"a#0", std::nan("")}}, h, opts()), Error);
}

TEST_CASE("plans and histories survive JSON") {
    MoveHistory h;
    const auto plans = planner::plan({item("a", 0, KnowledgeKind::Procedural, Domain::ProgrammingRelated),
                                      item("a", 1, KnowledgeKind::Declarative, Domain::ProgrammingRelated)},
                                     {{"a#0", 0.5}}, h, opts());
    CHECK(planner::parse_plans(nlohmann::json::parse(planner::to_json(plans).dump())) == plans);
    CHECK(planner::parse_history(nlohmann::json::parse(planner::to_json(h).dump())) == h);
    CHECK_THROWS_AS(planner::parse_plans(nlohmann::json::parse(R"([{"knowledge_id":"x","moves":["Lecture"]}])")),
                    Error);
}
