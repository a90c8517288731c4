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

#include "core/error.hpp"
#include "gateway/mock_gateway.hpp"
#include "ingestion/code.hpp"
#include "knowledge/knowledge.hpp"
#include "support.hpp"

using namespace apprentice;
using knowledge::classify;
using knowledge::validate_format;
using nlohmann::json;

namespace {

const char* kProcConcept =
    "To understand the distribution of earnings by college major, one must &examine the histogram and identify "
    "overall trend or extreme values&, and consider how wide the spread between majors is.";
const char* kDeclConcept =
    "The median income by college major shows that majors earn a median income of over $30K right out of college.";
const char* kDeclProg =
    "The task is loading the college majors data using read_csv and checking the columns with glimpse.";
const char* kProcProg =
    "To achieve a table of recent graduates in the session, one must use 'read_csv' on the csv link because it "
    "parses the file straight into a tibble.";

struct Eda {
    ingest::ExpertConfig config = ingest::load_config(testsupport::fixture("eda/config.json"));
    ingest::Transcript transcript = ingest::load_transcript("transcript.json", {testsupport::fixture("eda"), true});
    ingest::CodeArtifact code = ingest::load_code("code.R", VideoType::Mixed, {testsupport::fixture("eda"), true});
    std::vector<seg::VideoSegment> segments =
        seg::parse_segments(json::parse(testsupport::read("eda/segments.json")), transcript);
};

}  // namespace

TEST_CASE("procedural concept template") {
    const auto c = validate_format(kProcConcept, KnowledgeKind::Procedural, Domain::ConceptRelated);
    REQUIRE(c);
    CHECK(c.match->slots.at("goal") == "understand the distribution of earnings by college major");
    CHECK(c.match->slots.at("actions") == "examine the histogram and identify overall trend or extreme values");
    CHECK(c.match->slots.at("details") == "and consider how wide the spread between majors is");
    CHECK(c.match->anchor_span == "examine the histogram and identify overall trend or extreme values");
    CHECK(c.match->marked);
    CHECK(c.match->text.find('&') == std::string::npos);
}

TEST_CASE("declarative concept template") {
    const auto c = validate_format(kDeclConcept, KnowledgeKind::Declarative, Domain::ConceptRelated);
    REQUIRE(c);
    CHECK(c.match->slots.at("subject") == "The median income by college major shows");
    CHECK(c.match->slots.at("clause") == "majors earn a median income of over $30K right out of college");
    CHECK(c.match->anchor_span == c.match->slots.at("clause"));
    CHECK_FALSE(c.match->marked);
}

TEST_CASE("programming templates") {
    const auto d = validate_format(kDeclProg, KnowledgeKind::Declarative, Domain::ProgrammingRelated);
    REQUIRE(d);
    CHECK(d.match->slots.at("goal") == "loading the college majors data");
    CHECK(d.match->slots.at("method") == "read_csv");
    CHECK(d.match->slots.at("enhancement") == "checking the columns with glimpse");
    CHECK(d.match->anchor_span == "loading the college majors data");

    const auto p = validate_format(kProcProg, KnowledgeKind::Procedural, Domain::ProgrammingRelated);
    REQUIRE(p);
    CHECK(p.match->slots.at("goal") == "achieve a table of recent graduates in the session");
    CHECK(p.match->slots.at("action") == "use 'read_csv'");
    CHECK(p.match->slots.at("object") == "the csv link");
    CHECK(p.match->slots.at("reason") == "it parses the file straight into a tibble");
    CHECK(p.match->anchor_span == "use 'read_csv'");
}

TEST_CASE("rejections carry a diagnostic") {
    for (const char* bad : {"Majors are great.", "Loading data is the first thing you do.", ""}) {
        const auto c = classify(bad);
        CHECK_FALSE(c);
        CHECK_FALSE(c.diagnostic.empty());
    }
    const auto wrong = validate_format(kDeclProg, KnowledgeKind::Declarative, Domain::ConceptRelated);
    CHECK_FALSE(wrong);
    CHECK(wrong.diagnostic.find("nearest template is declarative/programming_related") != std::string::npos);

    const auto mislabelled = validate_format(knowledge::labelled_text(KnowledgeKind::Declarative, kProcProg),
                                             KnowledgeKind::Procedural, Domain::ProgrammingRelated);
    CHECK_FALSE(mislabelled);
    CHECK(mislabelled.diagnostic.starts_with("labelled"));
}

TEST_CASE("classify picks kind and domain from the wording") {
    const std::pair<const char*, std::pair<KnowledgeKind, Domain>> cases[] = {
        {kProcConcept, {KnowledgeKind::Procedural, Domain::ConceptRelated}},
        {kDeclConcept, {KnowledgeKind::Declarative, Domain::ConceptRelated}},
        {kDeclProg, {KnowledgeKind::Declarative, Domain::ProgrammingRelated}},
        {kProcProg, {KnowledgeKind::Procedural, Domain::ProgrammingRelated}},
    };
    for (const auto& [text, want] : cases) {
        CAPTURE(text);
        const auto c = classify(text);
        REQUIRE(c);
        CHECK(c.match->kind == want.first);
        CHECK(c.match->domain == want.second);
    }
    const auto labelled = classify(std::string("\"Procedural knowledge: ") + kProcProg + "\"");
    REQUIRE(labelled);
    CHECK(labelled.match->text == kProcProg);
}

TEST_CASE("label helpers invert each other") {
    const auto [kind, body] = knowledge::strip_label(knowledge::labelled_text(KnowledgeKind::Declarative, kDeclConcept));
    CHECK(kind == KnowledgeKind::Declarative);
    CHECK(body == kDeclConcept);
    CHECK_FALSE(knowledge::strip_label(kDeclConcept).first.has_value());
}

TEST_CASE("extraction on the EDA segments") {
    Eda eda;
    auto gw = testsupport::mock("eda/mock.json");
    // Skip the two segmentation replies.
    gateway::GenerationRequest skip;
    skip.stage = "segmentation.summarize";
    gw->generate(skip);
    skip.stage = "segmentation.retrieve";
    gw->generate(skip);

    const auto ex = knowledge::extract_video(eda.segments, eda.transcript, eda.config, eda.code, *gw);
    CHECK(ex.segment_order == std::vector<std::string>{"Load data - 0", "Visualize the data - 435",
                                                       "Interpret the chart - 461", "Visualize the data - 509"});
    const auto& load = ex.knowledge.at("Load data - 0");
    REQUIRE(load.size() == 2);
    CHECK(load[0].id == "Load data - 0#0");
    CHECK(load[1].kind == KnowledgeKind::Procedural);
    CHECK(load[1].anchor_span == "use 'read_csv'");
    REQUIRE(ex.rejections.at("Load data - 0").size() == 1);
    CHECK(ex.rejections.at("Load data - 0")[0].reply_item == "Loading data is the first thing you do.");

    const auto& interp = ex.knowledge.at("Interpret the chart - 461");
    REQUIRE(interp.size() == 2);
    CHECK(interp[1].domain == Domain::ConceptRelated);
    CHECK(knowledge::anchor_of(interp[1]) == "examine the histogram and identify overall trend or extreme values");
    CHECK(ex.knowledge.at("Visualize the data - 509").size() == 4);
    CHECK(ex.rejections.size() == 1);

    // Written and read back, order recovered from the keys.
    const auto doc = knowledge::to_json(ex.knowledge, ex.segment_order);
    const auto [map, order] = knowledge::parse_knowledge(json::parse(doc.dump()));
    CHECK(order == ex.segment_order);
    CHECK(map.at("Visualize the data - 509") == ex.knowledge.at("Visualize the data - 509"));
}

TEST_CASE("concept segments keep one procedural item") {
    Eda eda;
    const auto& seg = eda.segments[2];
    const std::string reply = json::array({knowledge::labelled_text(KnowledgeKind::Procedural, kProcConcept),
                                           kDeclConcept, kProcConcept, kDeclConcept, kDeclConcept, kDeclConcept})
                                  .dump();
    gateway::MockGateway gw(gateway::MockScript{{"*", reply}});
    const auto ex = knowledge::summarize_knowledge(seg, eda.transcript, Domain::ConceptRelated, nullptr,
                                                   {eda.config.topic, 4}, gw);
    REQUIRE(ex.items.size() == 4);
    CHECK(ex.items[0].kind == KnowledgeKind::Procedural);
    CHECK(ex.items[3].order_index == 3);
    REQUIRE(ex.rejections.size() == 2);
    CHECK(ex.rejections[0].reason == "concept segments keep a single procedural item");
    CHECK(ex.rejections[1].reason == "over the item limit");

    gateway::MockGateway none(gateway::MockScript{{"*", json::array({kDeclConcept}).dump()}});
    const auto missing = knowledge::summarize_knowledge(seg, eda.transcript, Domain::ConceptRelated, nullptr,
                                                        {eda.config.topic, 4}, none);
    CHECK(missing.items.size() == 1);
    REQUIRE(missing.rejections.size() == 1);
    CHECK(missing.rejections[0].reply_item.empty());
}

TEST_CASE("segments without text or code") {
    Eda eda;
    gateway::MockGateway gw;
    const ingest::Transcript blank = ingest::parse_transcript(R"([{"text":"   ","start":0,"duration":1}])");
    seg::VideoSegment s{"Interpret the chart", 0.0, 1.0, "", 0, 0};
    CHECK(knowledge::summarize_knowledge(s, blank, Domain::ConceptRelated, nullptr, {}, gw).items.empty());
    CHECK(gw.generate_calls() == 0);
    try {
        knowledge::summarize_knowledge(eda.segments[0], eda.transcript, Domain::ProgrammingRelated, nullptr, {}, gw);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("items without a valid text are refused on load") {
    json j = {{"id", "x#0"}, {"kind", "declarative"}, {"domain", "concept_related"}, {"text", "Majors are great."}};
    CHECK_THROWS_AS(knowledge::item_from_json(j), Error);
    j["text"] = kDeclConcept;
    const auto item = knowledge::item_from_json(j);
    CHECK(item.anchor_span == "majors earn a median income of over $30K right out of college");
}
