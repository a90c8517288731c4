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

#include <set>

#include "core/error.hpp"
#include "gateway/mock_gateway.hpp"
#include "orchestrator/orchestrator.hpp"
#include "support.hpp"

using namespace apprentice;
using namespace apprentice::orchestrator;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const char* kReorder = "mutate(Major_category = fct_reorder(Major_category, Median)) %>%";

ingest::CodeArtifact eda_code() {
    return ingest::load_code("code.R", VideoType::Mixed, {testsupport::fixture("eda"), true});
}

InboundEvent ev(EventType type) {
    InboundEvent e;
    e.type = type;
    return e;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

}  // namespace

TEST_CASE("blanking a code line") {
    const std::vector<std::string> pool = {"ggplot", "geom_boxplot", "fct_reorder", "coord_flip", "Median", "mutate"};
    const auto b = blank_out(kReorder, "use 'fct_reorder' on 'Major_category'", pool, 7);
    CHECK(b.blanks == std::vector<std::string>{"fct_reorder", "Major_category"});
    CHECK(b.display_line == "mutate(__2__ = __1__(__2__, Median)) %>%");
    REQUIRE(b.options.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(b.options[k].size() == 4);
        CHECK(std::count(b.options[k].begin(), b.options[k].end(), b.blanks[k]) == 1);
        CHECK(std::set<std::string>(b.options[k].begin(), b.options[k].end()).size() == 4);
        // Distractors never repeat another blank's answer.
        for (const auto& o : b.options[k]) CHECK((o == b.blanks[k] || o != b.blanks[1 - k]));
    }
    CHECK(blank_out(kReorder, "use 'fct_reorder' on 'Major_category'", pool, 7) == b);

    const auto fallback = blank_out("x <- read_csv(\"fct_reorder.csv\")", "load the file", {}, 1);
    CHECK(fallback.blanks == std::vector<std::string>{"read_csv"});
    CHECK(fallback.display_line == "x <- __1__(\"fct_reorder.csv\")");
    CHECK(fallback.options == std::vector<std::vector<std::string>>{{"read_csv"}});

    CHECK(code_of([] { blank_out("  ", "x", {}, 1); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { blank_out("# just a comment", "x", {}, 1); }) == ErrorCode::Validation);
}

TEST_CASE("choosing code to show") {
    const auto code = eda_code();
    CHECK(select_code_line(code, "use 'geom_boxplot'", "one must use 'geom_boxplot' on 'ggplot'") == "geom_boxplot() +");
    CHECK(select_code_line(code, "use 'fct_reorder'", "use 'fct_reorder' on 'Major_category'") == kReorder);
    CHECK(select_code_line(code, "look at it", "nothing quoted") == "library(tidyverse)");
    CHECK(select_code_block(code, "use 'geom_histogram'", "").find("bins = 30") != std::string::npos);
    CHECK(select_code_block(code, "nothing", "") .find("library(scales)\n\nrecent_grads") != std::string::npos);
    CHECK(code_of([] { select_code_block({}, "x", ""); }) == ErrorCode::UnresolvedParameter);
}

TEST_CASE("grading") {
    CHECK(grade_choice("D", "D"));
    CHECK_FALSE(grade_choice("D", "A"));
    CHECK(grade_choice("D", " D) geom_line "));
    CHECK_FALSE(grade_choice("D", "d"));
    CHECK_FALSE(grade_choice("D", ""));

    CHECK(grade_blanks({"fct_reorder"}, {"fct_reorder"}));
    CHECK(grade_blanks({"fct_reorder"}, {" fct_reorder "}));
    CHECK_FALSE(grade_blanks({"fct_reorder"}, {"Fct_reorder"}));
    CHECK_FALSE(grade_blanks({"a", "b"}, {"a"}));
    CHECK_FALSE(grade_blanks({}, {}));

    gateway::MockGateway gw(gateway::MockScript{{"*", "CORRECT"}, {"*", "Incorrect."}, {"*", "maybe"}});
    CHECK(grade_rubric(gw, "k", "q", "a") == true);
    CHECK(grade_rubric(gw, "k", "q", "a") == false);
    CHECK_FALSE(grade_rubric(gw, "k", "q", "a").has_value());
    CHECK(gw.requests()[0].stage == "conversation.grade");

    Expected ex;
    ex.interaction = Interaction::ShowCode;
    CHECK_FALSE(grade(ex, ev(EventType::StudentResponse), gw).has_value());
}

TEST_CASE("multiple-choice replies") {
    const auto p = parse_choice_reply(
        "Which layer draws one box per group?\nA) geom_bar\nB) geom_boxplot\nC) geom_point\nD) geom_line\nAnswer: B");
    CHECK(p.stem == "Which layer draws one box per group?");
    REQUIRE(p.options.size() == 4);
    CHECK(p.options[1] == ChoiceOption{"B", "geom_boxplot"});
    CHECK(p.answer == "B");

    CHECK(parse_choice_reply("Q\n(a) one\n(b) two\n**Answer:** b").answer == "B");
    CHECK_FALSE(parse_choice_reply("Q\nA) one\nB) two").answer.has_value());
    CHECK(parse_choice_reply("just prose").options.empty());
}

TEST_CASE("events parse and round trip") {
    const auto e = parse_event(json::parse(
        R"({"type":"student_response","id":"e1","blanks":["geom_boxplot"],"segment_id":"Visualize the data - 509"})"));
    CHECK(e.type == EventType::StudentResponse);
    CHECK(e.blanks == std::vector<std::string>{"geom_boxplot"});
    CHECK(parse_event(json::parse(to_json(e).dump())) == e);
    CHECK(signal_of(EventType::CodeExecution) == student::Signal::Error);
    CHECK(signal_of(EventType::Question) == student::Signal::Help);
    CHECK_THROWS_AS(parse_event(json::parse(R"({"type":"dance"})")), Error);
}

TEST_CASE("session walk through the box-plot lesson") {
    testsupport::TempDir dir("session");
    const auto config = ingest::load_config(testsupport::fixture("eda/config.json"));
    student::StudentStore store(dir.path, config.bkt_defaults, 0.80);
    const auto transcript = ingest::load_transcript("transcript.json", {testsupport::fixture("eda"), true});

    SessionInputs in;
    in.session_id = "s";
    in.student_id = "learner";
    in.config = config;
    ordered_json doc;
    doc["Visualize the data - 509"] = ordered_json::parse(testsupport::read("boxplot/dsl.json"));
    in.dsl = dsl::parse(doc);
    in.segments = seg::parse_segments(json::parse(testsupport::read("eda/segments.json")), transcript);
    in.code = eda_code();
    auto gw = std::make_shared<gateway::MockGateway>(gateway::MockScript{
        {"conversation.corrective", "Check the name of the object."},
        {"conversation.help", "Try a violin plot next."},
        {"*", "m1"}, {"*", "m2"}, {"*", "m3"}, {"*", "m4"}, {"*", "m5"}, {"*", "m6"}});
    in.gateway = gw;
    in.store = &store;
    Session s(std::move(in));
    REQUIRE(s.queue().size() == 6);

    // The lesson opens on its clip and waits for it.
    auto r = s.step();
    REQUIRE(r.envelope);
    CHECK(r.envelope->type == EnvelopeType::PlayClip);
    CHECK(r.envelope->clip == Clip{509.5, 551.0});
    CHECK(s.step().kind == StepResult::Kind::Blocked);
    CHECK(code_of([&] { s.handle_event(ev(EventType::StudentResponse)); }) == ErrorCode::Phase);
    CHECK(s.handle_event(ev(EventType::VideoFinished)).advanced);

    CHECK(s.step().envelope->body == "m1");
    CHECK(s.step().envelope->body == "m2");
    r = s.step();
    REQUIRE(r.envelope);
    CHECK(r.envelope->type == EnvelopeType::FillInBlanks);
    CHECK(r.envelope->need_response);
    REQUIRE(r.envelope->blanks);
    CHECK(r.envelope->blanks->display_line == "__1__() +");
    CHECK(s.phase() == Phase::AwaitingResponse);
    CHECK(s.step().kind == StepResult::Kind::Blocked);
    CHECK(code_of([&] { s.handle_event(ev(EventType::GoOn)); }) == ErrorCode::Phase);

    // A passing code run is not an answer to a fill-in message.
    auto ok_run = ev(EventType::CodeExecution);
    CHECK(s.handle_event(ok_run).replies.empty());

    auto wrong = ev(EventType::StudentResponse);
    wrong.blanks = {"geom_bar"};
    const auto graded = s.handle_event(wrong);
    REQUIRE(graded.observation);
    CHECK_FALSE(graded.observation->correct);
    CHECK(graded.observation->anchor_text == "use 'geom_boxplot'");
    REQUIRE(graded.replies.size() == 1);
    CHECK(graded.replies[0].body == "Not quite. The blanks are: 1) geom_boxplot");
    const auto model = store.load("learner");
    REQUIRE(model.components.size() == 1);
    const double post = 0.4 * 0.1 / (0.4 * 0.1 + 0.6 * 0.8);
    CHECK(std::abs(model.components[0].p_mastery - (post + (1 - post) * 0.1)) < 1e-12);

    CHECK(s.step().envelope->body == "m4");
    CHECK(s.step().envelope->body == "m5");
    r = s.step();
    REQUIRE(r.envelope);
    CHECK(r.envelope->type == EnvelopeType::ShowCode);
    CHECK(r.envelope->code.find("coord_flip()") != std::string::npos);
    CHECK(code_of([&] { s.handle_event(wrong); }) == ErrorCode::Phase);

    auto fail_run = ev(EventType::CodeExecution);
    fail_run.success = false;
    fail_run.stderr_text = "Error: could not find function \"coord_flp\"";
    const auto fixed = s.handle_event(fail_run);
    CHECK(fixed.advanced);
    REQUIRE(fixed.replies.size() == 1);
    CHECK(fixed.replies[0].origin == "corrective");
    CHECK(fixed.replies[0].body == "Check the name of the object.");
    CHECK(gw->requests().back().user_prompt.find("coord_flp") != std::string::npos);

    r = s.step();
    REQUIRE(r.envelope);
    CHECK(r.envelope->origin == "farewell");
    CHECK(s.phase() == Phase::Done);
    CHECK(s.step().kind == StepResult::Kind::Done);

    auto q = ev(EventType::Question);
    q.text = "what else could I plot?";
    const auto help = s.handle_event(q);
    REQUIRE(help.replies.size() == 1);
    CHECK(help.replies[0].move == MentorMove::Exploration);
    CHECK(help.replies[0].body == "Try a violin plot next.");

    const auto& st = s.stats();
    CHECK(st.dequeued == 6);
    CHECK(st.blocking_sent == 2);
    CHECK(st.responses == 2);
    CHECK(st.queue_grew == 0);
    CHECK(st.sent_while_blocked == 0);
    CHECK(gw->remaining() == 0);
}

TEST_CASE("sessions refuse missing collaborators") {
    SessionInputs in;
    CHECK(code_of([&] { Session s(in); }) == ErrorCode::InvalidArgument);
}
