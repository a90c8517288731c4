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
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dsl/dsl.hpp"
#include "gateway/gateway.hpp"
#include "ingestion/code.hpp"
#include "ingestion/config.hpp"
#include "segmentation/segmentation.hpp"
#include "student/student_model.hpp"

namespace apprentice::orchestrator {

enum class Phase { AwaitingVideo, Sending, AwaitingResponse, Idle, Done };
std::string_view to_string(Phase p) noexcept;

enum class EnvelopeType { Text, MultipleChoice, FillInBlanks, ShowCode, PlayClip };
std::string_view to_string(EnvelopeType t) noexcept;

struct Clip {
    double start_s = 0.0;
    double end_s = 0.0;
    bool operator==(const Clip&) const = default;
};

struct ChoiceOption {
    std::string label;  // "A"
    std::string text;
    bool operator==(const ChoiceOption&) const = default;
};

struct BlankedLine {
    std::string display_line;  // blanks rendered as __1__, __2__, ...
    std::vector<std::string> blanks;                // expected tokens, in blank order
    std::vector<std::vector<std::string>> options;  // per blank
    bool operator==(const BlankedLine&) const = default;
};

/// Outbound message as delivered to the client.
struct Envelope {
    EnvelopeType type = EnvelopeType::Text;
    std::string body;
    std::vector<ChoiceOption> options;
    std::optional<BlankedLine> blanks;  // expected tokens are not serialized
    std::optional<Clip> clip;
    std::string code;
    bool need_response = false;
    // Bookkeeping: which part of the loop produced it.
    std::string origin;  // queue | segment_clip | feedback | corrective | help | farewell
    std::optional<MentorMove> move;
    std::string knowledge_id;
    std::uint64_t seq = 0;

    bool operator==(const Envelope&) const = default;
};

nlohmann::ordered_json to_json(const Envelope& e);

enum class EventType { VideoFinished, StudentResponse, CodeExecution, Question, GoOn };
std::string_view to_string(EventType t) noexcept;

struct InboundEvent {
    EventType type = EventType::GoOn;
    std::string id;  // client-supplied, for idempotence
    std::string segment_id;
    std::string text;
    std::optional<std::string> choice;
    std::vector<std::string> blanks;
    bool success = true;
    std::string stderr_text;
    std::string code;

    bool operator==(const InboundEvent&) const = default;
};

InboundEvent parse_event(const nlohmann::json& j);
nlohmann::ordered_json to_json(const InboundEvent& e);
student::Signal signal_of(EventType t) noexcept;

/// Replaces anchor tokens found in `code_line` with numbered blanks. Falls
/// back to the first function call when the anchor names nothing in the line.
/// Options are the expected token plus up to three distractors from `pool`,
/// in an order fixed by `seed`.
BlankedLine blank_out(std::string_view code_line, std::string_view anchor, const std::vector<std::string>& pool,
                      std::uint64_t seed);

// Picks the code line the knowledge talks about.
std::string select_code_line(const ingest::CodeArtifact& code, std::string_view anchor, std::string_view knowledge);
// Picks the cell the knowledge talks about; whole artifact when none does.
std::string select_code_block(const ingest::CodeArtifact& code, std::string_view anchor, std::string_view knowledge);

struct ParsedChoice {
    std::string stem;
    std::vector<ChoiceOption> options;
    std::optional<std::string> answer;
};
// Options on "A) ..." lines; the key on an "Answer: X" line.
ParsedChoice parse_choice_reply(std::string_view reply);

bool grade_choice(std::string_view expected, std::string_view actual);
bool grade_blanks(const std::vector<std::string>& expected, const std::vector<std::string>& actual);
// Rubric verdict from the gateway; absent when the reply is neither verdict.
std::optional<bool> grade_rubric(gateway::Gateway& gw, std::string_view knowledge, std::string_view question,
                                 std::string_view answer);

struct Expected {
    Interaction interaction = Interaction::PlainText;
    std::string choice;
    std::vector<std::string> blanks;
    std::string question;
    std::string knowledge;
};

/// Observation outcome for a response to a message of `expected.interaction`.
/// Annotation and show-code (graded by the next code run) yield nothing here.
std::optional<bool> grade(const Expected& expected, const InboundEvent& actual, gateway::Gateway& gw);

struct Instrumentation {
    std::size_t initial_queue = 0;
    std::size_t dequeued = 0;
    std::size_t blocking_sent = 0;
    std::size_t responses = 0;      // events that answered a blocking message
    std::size_t extras = 0;         // history entries beyond queue sends and responses
    std::size_t model_updates = 0;  // observations applied or deferred
    std::size_t queue_grew = 0;     // must stay 0
    std::size_t sent_while_blocked = 0;
    std::vector<std::size_t> queue_sizes;  // after every step
};

struct SessionInputs {
    std::string session_id;
    std::string student_id;
    ingest::ExpertConfig config;
    dsl::DslDocument dsl;
    std::vector<seg::VideoSegment> segments;
    ingest::CodeArtifact code;
    gateway::GatewayPtr gateway;
    student::StudentStore* store = nullptr;
    std::uint64_t seed = 7;
};

struct StepResult {
    enum class Kind { Message, Blocked, Done } kind = Kind::Blocked;
    std::optional<Envelope> envelope;
    Phase phase = Phase::Sending;
};

struct EventResult {
    std::vector<Envelope> replies;
    std::optional<student::Observation> observation;
    bool advanced = false;
};

std::string conversation_system_prompt(const ingest::ExpertConfig& config);

/// One learner's pass through a compiled DSL. Not thread-safe; the service
/// serializes calls per session.
class Session {
public:
    explicit Session(SessionInputs inputs);

    StepResult step();
    EventResult handle_event(const InboundEvent& event);

    Phase phase() const noexcept { return phase_; }
    const std::vector<gateway::ChatTurn>& history() const noexcept { return history_; }
    const Instrumentation& stats() const noexcept { return stats_; }
    const dsl::MessageQueue& queue() const noexcept { return queue_; }
    const std::string& id() const noexcept { return in_.session_id; }
    const std::string& student_id() const noexcept { return in_.student_id; }
    const dsl::DslDocument& dsl() const noexcept { return in_.dsl; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    Envelope make(EnvelopeType type, std::string body, std::string origin);
    Envelope clip_for(const std::string& segment_key, std::string origin);
    std::map<std::string, std::string> resolve(const dsl::QueueMessage& m);
    std::string generate(std::string stage, std::string user_prompt, std::string system_prompt = {});
    void record_observation(bool correct, student::Signal signal, EventResult& out);
    Envelope feedback(std::string body);
    Envelope corrective(const InboundEvent& e);

    SessionInputs in_;
    dsl::MessageQueue queue_;
    Phase phase_ = Phase::AwaitingVideo;
    std::vector<gateway::ChatTurn> history_;
    std::map<std::string, const seg::VideoSegment*> segments_;
    std::string current_segment_;
    bool clip_pending_ = false;
    std::optional<dsl::QueueMessage> pending_;
    Expected expected_;
    std::string last_answer_;
    std::uint64_t seq_ = 0;
    std::vector<std::string> identifier_pool_;
    std::vector<std::string> warnings_;
    Instrumentation stats_;
};

struct ReplayReport {
    std::vector<Envelope> delivered;
    std::vector<std::pair<InboundEvent, EventResult>> events;
    Phase final_phase = Phase::Sending;
    Instrumentation stats;
    std::size_t history_size = 0;
};

/// Steps until blocked, feeds the next scripted event, and repeats until the
/// session is done and the script is consumed.
ReplayReport replay(Session& session, const std::vector<InboundEvent>& events);

std::vector<InboundEvent> parse_event_script(const nlohmann::json& doc);
nlohmann::ordered_json to_json(const ReplayReport& report);

}  // namespace apprentice::orchestrator
