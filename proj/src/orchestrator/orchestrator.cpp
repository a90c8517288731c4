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
#include "orchestrator/orchestrator.hpp"

#include <algorithm>
#include <random>
#include <regex>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::orchestrator {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Phase p) noexcept {
    switch (p) {
        case Phase::AwaitingVideo: return "awaiting_video";
        case Phase::Sending: return "sending";
        case Phase::AwaitingResponse: return "awaiting_response";
        case Phase::Idle: return "idle";
        case Phase::Done: return "done";
    }
    return "done";
}

std::string_view to_string(EnvelopeType t) noexcept {
    switch (t) {
        case EnvelopeType::Text: return "text";
        case EnvelopeType::MultipleChoice: return "multiple_choice";
        case EnvelopeType::FillInBlanks: return "fill_in_blanks";
        case EnvelopeType::ShowCode: return "show_code";
        case EnvelopeType::PlayClip: return "play_clip";
    }
    return "text";
}

std::string_view to_string(EventType t) noexcept {
    switch (t) {
        case EventType::VideoFinished: return "video_finished";
        case EventType::StudentResponse: return "student_response";
        case EventType::CodeExecution: return "code_execution";
        case EventType::Question: return "question";
        case EventType::GoOn: return "go_on";
    }
    return "go_on";
}

student::Signal signal_of(EventType t) noexcept {
    switch (t) {
        case EventType::VideoFinished:
        case EventType::GoOn: return student::Signal::Video;
        case EventType::StudentResponse: return student::Signal::Response;
        case EventType::CodeExecution: return student::Signal::Error;
        case EventType::Question: return student::Signal::Help;
    }
    return student::Signal::Video;
}

ordered_json to_json(const Envelope& e) {
    ordered_json j;
    j["type"] = to_string(e.type);
    j["body"] = e.body;
    if (!e.options.empty()) {
        j["options"] = ordered_json::array();
        for (const auto& o : e.options) j["options"].push_back({{"label", o.label}, {"text", o.text}});
    }
    if (e.blanks) {
        j["blanks"] = {{"line", e.blanks->display_line},
                       {"count", e.blanks->blanks.size()},
                       {"options", e.blanks->options}};
    }
    if (e.clip) j["clip"] = {{"start_s", e.clip->start_s}, {"end_s", e.clip->end_s}};
    if (!e.code.empty()) j["code"] = e.code;
    j["need_response"] = e.need_response;
    j["origin"] = e.origin;
    if (e.move) j["move"] = to_string(*e.move);
    if (!e.knowledge_id.empty()) j["knowledge_id"] = e.knowledge_id;
    j["seq"] = e.seq;
    return j;
}

InboundEvent parse_event(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        fail(ErrorCode::Validation, "event needs a string 'type'");
    const auto type = j["type"].get<std::string>();
    InboundEvent e;
    bool known = false;
    for (auto t : {EventType::VideoFinished, EventType::StudentResponse, EventType::CodeExecution, EventType::Question,
                   EventType::GoOn})
        if (to_string(t) == type) {
            e.type = t;
            known = true;
        }
    if (!known) fail(ErrorCode::Validation, "unknown event type '" + type + "'");
    auto opt_string = [&](const char* k) -> std::string {
        if (!j.contains(k) || j[k].is_null()) return {};
        if (!j[k].is_string()) fail(ErrorCode::Validation, std::string("event field '") + k + "' must be a string");
        return j[k].get<std::string>();
    };
    e.id = opt_string("id");
    e.segment_id = opt_string("segment_id");
    e.text = opt_string("text");
    e.stderr_text = opt_string("stderr");
    e.code = opt_string("code");
    if (j.contains("choice") && !j["choice"].is_null()) e.choice = opt_string("choice");
    if (j.contains("blanks")) {
        if (!j["blanks"].is_array()) fail(ErrorCode::Validation, "event field 'blanks' must be an array");
        for (const auto& b : j["blanks"]) {
            if (!b.is_string()) fail(ErrorCode::Validation, "blank answers must be strings");
            e.blanks.push_back(b.get<std::string>());
        }
    }
    switch (e.type) {
        case EventType::StudentResponse:
            if (e.text.empty() && !e.choice && e.blanks.empty())
                fail(ErrorCode::Validation, "student_response needs 'text', 'choice' or 'blanks'");
            break;
        case EventType::CodeExecution:
            if (!j.contains("success") || !j["success"].is_boolean())
                fail(ErrorCode::Validation, "code_execution needs a boolean 'success'");
            e.success = j["success"].get<bool>();
            break;
        case EventType::Question:
            if (text::trim(e.text).empty()) fail(ErrorCode::Validation, "question needs 'text'");
            break;
        default: break;
    }
    return e;
}

ordered_json to_json(const InboundEvent& e) {
    ordered_json j;
    j["type"] = to_string(e.type);
    if (!e.id.empty()) j["id"] = e.id;
    if (!e.segment_id.empty()) j["segment_id"] = e.segment_id;
    if (!e.text.empty()) j["text"] = e.text;
    if (e.choice) j["choice"] = *e.choice;
    if (!e.blanks.empty()) j["blanks"] = e.blanks;
    if (e.type == EventType::CodeExecution) j["success"] = e.success;
    if (!e.stderr_text.empty()) j["stderr"] = e.stderr_text;
    if (!e.code.empty()) j["code"] = e.code;
    return j;
}

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.'; }

std::vector<std::string> distinct(std::vector<std::string> v) {
    std::vector<std::string> out;
    for (auto& s : v)
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
    return out;
}

// Fisher-Yates with an explicit index draw, so orders match across standard libraries.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

bool line_has_identifier(std::string_view line, std::string_view tok) {
    const auto ids = text::identifiers(line);
    return std::find(ids.begin(), ids.end(), tok) != ids.end();
}

std::optional<std::string> first_call(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (c == '#') return std::nullopt;
        if (c == '"' || c == '\'') {
            const auto close = line.find(c, i + 1);
            if (close == std::string_view::npos) return std::nullopt;
            i = close + 1;
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_') {
            const auto start = i;
            while (i < line.size() && ident_char(line[i])) ++i;
            auto j = i;
            while (j < line.size() && line[j] == ' ') ++j;
            if (j < line.size() && line[j] == '(') return std::string(line.substr(start, i - start));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            while (i < line.size() && ident_char(line[i])) ++i;
            continue;
        }
        ++i;
    }
    return std::nullopt;
}

std::vector<std::string> anchor_tokens(std::string_view anchor, std::string_view knowledge) {
    auto tokens = text::quoted_tokens(anchor);
    for (auto& t : text::quoted_tokens(knowledge)) tokens.push_back(std::move(t));
    return distinct(std::move(tokens));
}

std::vector<std::string> lines_of(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

}  // namespace

BlankedLine blank_out(std::string_view code_line, std::string_view anchor, const std::vector<std::string>& pool,
                      std::uint64_t seed) {
    if (text::trim(code_line).empty()) fail(ErrorCode::InvalidArgument, "cannot blank an empty code line");
    BlankedLine out;
    const auto in_line = distinct(text::identifiers(code_line));
    for (const auto& tok : text::quoted_tokens(anchor))
        if (std::find(in_line.begin(), in_line.end(), tok) != in_line.end() &&
            std::find(out.blanks.begin(), out.blanks.end(), tok) == out.blanks.end())
            out.blanks.push_back(tok);
    if (out.blanks.empty()) {
        auto call = first_call(code_line);
        if (!call) fail(ErrorCode::Validation, "no identifier to blank in '" + std::string(code_line) + "'");
        out.blanks.push_back(*call);
    }

    std::string display;
    std::size_t i = 0;
    while (i < code_line.size()) {
        const char c = code_line[i];
        if (c == '"' || c == '\'') {
            const auto close = code_line.find(c, i + 1);
            const auto end = close == std::string_view::npos ? code_line.size() : close + 1;
            display.append(code_line.substr(i, end - i));
            i = end;
            continue;
        }
        if (ident_char(c)) {
            const auto start = i;
            while (i < code_line.size() && ident_char(code_line[i])) ++i;
            const auto tok = code_line.substr(start, i - start);
            const auto hit = std::find(out.blanks.begin(), out.blanks.end(), tok);
            if (hit != out.blanks.end()) {
                display += "__" + std::to_string(hit - out.blanks.begin() + 1) + "__";
            } else {
                display.append(tok);
            }
            continue;
        }
        display.push_back(c);
        ++i;
    }
    out.display_line = display;

    std::vector<std::string> candidates;
    for (const auto& p : distinct(pool))
        if (!p.empty() && std::find(out.blanks.begin(), out.blanks.end(), p) == out.blanks.end())
            candidates.push_back(p);
    for (std::size_t k = 0; k < out.blanks.size(); ++k) {
        std::mt19937_64 rng(seed ^ text::fnv1a(code_line) ^ ((k + 1) * 0x9E3779B97F4A7C15ULL));
        auto pick = candidates;
        shuffle(pick, rng);
        if (pick.size() > 3) pick.resize(3);
        std::vector<std::string> opts{out.blanks[k]};
        opts.insert(opts.end(), pick.begin(), pick.end());
        shuffle(opts, rng);
        out.options.push_back(std::move(opts));
    }
    return out;
}

std::string select_code_line(const ingest::CodeArtifact& code, std::string_view anchor, std::string_view knowledge) {
    // Anchor tokens outrank tokens that only the knowledge sentence quotes;
    // the line with the best count wins and earlier lines break ties.
    const auto own = text::quoted_tokens(anchor);
    const auto tokens = anchor_tokens(anchor, knowledge);
    std::string best;
    std::size_t best_hits = 0;
    for (const auto& cell : code.cells)
        for (const auto& line : lines_of(cell.text)) {
            std::size_t hits = 0;
            for (const auto& t : tokens)
                if (line_has_identifier(line, t))
                    hits += std::find(own.begin(), own.end(), t) != own.end() ? 1000 : 1;
            if (hits > best_hits) {
                best_hits = hits;
                best = std::string(text::trim(line));
            }
        }
    if (best_hits > 0) return best;
    for (const auto& cell : code.cells)
        for (const auto& line : lines_of(cell.text))
            if (first_call(line)) return std::string(text::trim(line));
    fail(ErrorCode::UnresolvedParameter, "code-line-with-blanks: no code line to practise for this knowledge");
}

std::string select_code_block(const ingest::CodeArtifact& code, std::string_view anchor, std::string_view knowledge) {
    if (code.empty()) fail(ErrorCode::UnresolvedParameter, "code-block: the lesson has no code");
    for (const auto& tok : anchor_tokens(anchor, knowledge))
        for (const auto& cell : code.cells)
            if (line_has_identifier(cell.text, tok)) return cell.text;
    std::string all;
    for (const auto& cell : code.cells) {
        if (!all.empty()) all += "\n\n";
        all += cell.text;
    }
    return all;
}

ParsedChoice parse_choice_reply(std::string_view reply) {
    static const std::regex option_re(R"(^\s*\(?([A-Ha-h])[\)\.:]\s+(.+?)\s*$)");
    static const std::regex answer_re(R"(^\s*\**\s*(?:correct\s+)?answer\s*\**\s*[:\-]\s*\**\s*\(?([A-Ha-h])\b.*$)",
                                      std::regex::icase);
    ParsedChoice out;
    std::string stem;
    for (const auto& line : lines_of(reply)) {
        std::smatch m;
        if (std::regex_match(line, m, answer_re)) {
            out.answer = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0]))));
            continue;
        }
        if (std::regex_match(line, m, option_re)) {
            out.options.push_back(
                {std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])))), m[2].str()});
            continue;
        }
        if (out.options.empty()) {
            if (!stem.empty()) stem += "\n";
            stem += line;
        }
    }
    out.stem = std::string(text::trim(stem));
    return out;
}

bool grade_choice(std::string_view expected, std::string_view actual) {
    auto a = text::trim(actual);
    if (a.size() > 1 && (a[1] == ')' || a[1] == '.')) a = a.substr(0, 1);
    return !a.empty() && a == text::trim(expected);
}

bool grade_blanks(const std::vector<std::string>& expected, const std::vector<std::string>& actual) {
    if (expected.empty() || expected.size() != actual.size()) return false;
    for (std::size_t i = 0; i < expected.size(); ++i)
        if (text::normalize_whitespace(expected[i]) != text::normalize_whitespace(actual[i])) return false;
    return true;
}

std::optional<bool> grade_rubric(gateway::Gateway& gw, std::string_view knowledge, std::string_view question,
                                 std::string_view answer) {
    gateway::GenerationRequest req;
    req.stage = "conversation.grade";
    req.system_prompt = "You mark short student explanations. Reply with the single word CORRECT or INCORRECT.";
    std::ostringstream p;
    p << "Rubric check.\nKnowledge: " << knowledge << "\nQuestion asked: " << question << "\nStudent answer: " << answer
      << "\nDoes the answer show the student grasps the knowledge?";
    req.user_prompt = p.str();
    req.temperature = 0.0;
    req.max_tokens = 5;
    const auto verdict = text::to_lower(text::trim(gw.generate(req)));
    if (verdict.starts_with("incorrect")) return false;
    if (verdict.starts_with("correct")) return true;
    return std::nullopt;
}

std::optional<bool> grade(const Expected& expected, const InboundEvent& actual, gateway::Gateway& gw) {
    switch (expected.interaction) {
        case Interaction::MultipleChoice:
            return grade_choice(expected.choice, actual.choice.value_or(actual.text));
        case Interaction::FillInBlanks: return grade_blanks(expected.blanks, actual.blanks);
        case Interaction::PlainText:
            return grade_rubric(gw, expected.knowledge, expected.question, actual.text);
        case Interaction::ShowCode:
        case Interaction::Annotation: return std::nullopt;
    }
    return std::nullopt;
}

std::string conversation_system_prompt(const ingest::ExpertConfig& config) {
    std::ostringstream p;
    p << "You are a teaching assistant tutoring one student through a " << to_string(config.video_type)
      << " tutorial about " << config.topic << ", using the cognitive apprenticeship approach.\n"
      << "Every turn names a mentor move, the knowledge at stake and an instruction. Carry out that move exactly "
         "as instructed and nothing more.\n"
      << "Stay on " << config.topic;
    if (!config.kernel_language.empty()) p << " and the " << config.kernel_language << " language";
    p << ". Speak in the first person and keep it short. Do not mention that you were given a transcript or code.";
    return p.str();
}

Session::Session(SessionInputs inputs) : in_(std::move(inputs)), queue_(dsl::build_queue(in_.dsl)) {
    if (!in_.gateway) fail(ErrorCode::InvalidArgument, "session needs a gateway");
    if (in_.store == nullptr) fail(ErrorCode::InvalidArgument, "session needs a student store");
    for (const auto& s : in_.segments) segments_[s.key()] = &s;
    identifier_pool_ = distinct(in_.code.identifiers());
    stats_.initial_queue = queue_.size();
    if (const auto* head = queue_.peek(); head != nullptr && segments_.contains(head->segment_key)) {
        current_segment_ = head->segment_key;
        clip_pending_ = true;
    } else {
        phase_ = Phase::Sending;
        if (head != nullptr) current_segment_ = head->segment_key;
    }
}

Envelope Session::make(EnvelopeType type, std::string body, std::string origin) {
    Envelope e;
    e.type = type;
    e.body = std::move(body);
    e.origin = std::move(origin);
    e.seq = ++seq_;
    return e;
}

Envelope Session::clip_for(const std::string& key, std::string origin) {
    const auto* s = segments_.at(key);
    auto e = make(EnvelopeType::PlayClip, "Watch this part of the video: " + s->goal_name + ".", std::move(origin));
    e.clip = Clip{s->start_s, s->end_s};
    return e;
}

std::string Session::generate(std::string stage, std::string user_prompt, std::string system_prompt) {
    gateway::GenerationRequest req;
    req.stage = std::move(stage);
    req.system_prompt = system_prompt.empty() ? conversation_system_prompt(in_.config) : std::move(system_prompt);
    req.history = gateway::trim_history(history_, static_cast<std::size_t>(in_.config.gateway.history_token_budget));
    req.user_prompt = std::move(user_prompt);
    req.temperature = in_.config.gateway.temperature;
    req.max_tokens = in_.config.gateway.max_tokens;
    return in_.gateway->generate(req);
}

std::map<std::string, std::string> Session::resolve(const dsl::QueueMessage& m) {
    std::map<std::string, std::string> out;
    for (const auto& name : m.parameters) {
        if (auto b = m.bindings.find(name); b != m.bindings.end() && b->second) {
            out[name] = *b->second;
        } else if (name == dsl::kKnowledgeParameter) {
            out[name] = m.knowledge;
        } else if (name == "code-line-with-blanks") {
            const auto line = select_code_line(in_.code, m.anchor, m.knowledge);
            out[name] = blank_out(line, m.anchor, identifier_pool_, in_.seed).display_line;
        } else if (name == "code-block") {
            out[name] = select_code_block(in_.code, m.anchor, m.knowledge);
        } else if (name == "student-answer") {
            if (last_answer_.empty())
                fail(ErrorCode::UnresolvedParameter, "parameter 'student-answer' has no earlier answer to refer to");
            out[name] = last_answer_;
        } else if (name == "topic") {
            out[name] = in_.config.topic;
        } else {
            fail(ErrorCode::UnresolvedParameter, "parameter '" + name + "' cannot be bound for the " +
                                                     std::string(to_string(m.move)) + " message");
        }
    }
    return out;
}

StepResult Session::step() {
    StepResult r;
    auto finish = [&](Envelope e) {
        r.kind = StepResult::Kind::Message;
        r.envelope = std::move(e);
        r.phase = phase_;
        if (!stats_.queue_sizes.empty() && queue_.size() > stats_.queue_sizes.back()) ++stats_.queue_grew;
        stats_.queue_sizes.push_back(queue_.size());
        return r;
    };

    if (phase_ == Phase::Done) {
        r.kind = StepResult::Kind::Done;
        r.phase = phase_;
        return r;
    }
    if (phase_ == Phase::AwaitingResponse) {
        r.phase = phase_;
        return r;
    }
    if (phase_ == Phase::AwaitingVideo) {
        if (!clip_pending_) {
            r.phase = phase_;
            return r;
        }
        clip_pending_ = false;
        return finish(clip_for(current_segment_, "segment_clip"));
    }

    if (pending_) ++stats_.sent_while_blocked;
    const auto* head = queue_.peek();
    if (head == nullptr) {
        phase_ = Phase::Done;
        auto e = make(EnvelopeType::Text,
                      "That was the last step for this video. Feel free to ask me anything else about " +
                          in_.config.topic + ".",
                      "farewell");
        history_.push_back({"assistant", e.body});
        ++stats_.extras;
        return finish(std::move(e));
    }
    if (head->segment_key != current_segment_) {
        current_segment_ = head->segment_key;
        if (segments_.contains(current_segment_)) {
            phase_ = Phase::AwaitingVideo;
            return finish(clip_for(current_segment_, "segment_clip"));
        }
    }

    const bool has_clip = segments_.contains(head->segment_key);
    if (head->move == MentorMove::Modeling && has_clip) {
        auto msg = *queue_.dequeue();
        ++stats_.dequeued;
        auto e = clip_for(msg.segment_key, "queue");
        e.body = msg.action.empty() ? e.body : msg.action;
        e.move = msg.move;
        e.knowledge_id = msg.knowledge_id;
        history_.push_back({"assistant", "[video clip " + std::to_string(e.clip->start_s) + "-" +
                                             std::to_string(e.clip->end_s) + "] " + e.body});
        phase_ = Phase::AwaitingVideo;
        return finish(std::move(e));
    }

    // Bind everything before dequeuing so a failure leaves the queue intact.
    const auto params = resolve(*head);
    std::optional<BlankedLine> blanks;
    std::string code_block;
    if (head->interaction == Interaction::FillInBlanks)
        blanks = blank_out(select_code_line(in_.code, head->anchor, head->knowledge), head->anchor, identifier_pool_,
                           in_.seed);
    if (head->interaction == Interaction::ShowCode)
        code_block = params.contains("code-block") ? params.at("code-block")
                                                   : select_code_block(in_.code, head->anchor, head->knowledge);

    std::string instruction = head->prompt;
    for (const auto& [name, value] : params) instruction = text::replace_all(instruction, "{" + name + "}", value);
    if (const auto left = text::placeholders(instruction); !left.empty()) {
        for (const auto& l : left)
            if (std::find(head->parameters.begin(), head->parameters.end(), l) != head->parameters.end())
                fail(ErrorCode::UnresolvedParameter, "parameter '" + l + "' is still unbound");
    }

    std::ostringstream user;
    user << "Mentor move: " << to_string(head->move) << "\nAction: " << head->action
         << "\nInteraction: " << to_string(head->interaction) << "\nKnowledge: " << head->knowledge
         << "\nInstruction: " << instruction << "\n";
    if (head->interaction == Interaction::MultipleChoice)
        user << "Format: the question, then four options on their own lines as \"A) ...\" to \"D) ...\", then a "
                "last line \"Answer: <letter>\".\n";
    const auto reply = generate("conversation", user.str());

    auto msg = *queue_.dequeue();
    ++stats_.dequeued;

    Envelope e;
    Expected expected;
    expected.interaction = msg.interaction;
    expected.knowledge = msg.knowledge;
    switch (msg.interaction) {
        case Interaction::MultipleChoice: {
            auto parsed = parse_choice_reply(reply);
            if (parsed.options.size() >= 2 && parsed.answer) {
                e = make(EnvelopeType::MultipleChoice, parsed.stem, "queue");
                e.options = parsed.options;
                expected.choice = *parsed.answer;
            } else {
                warnings_.push_back("multiple-choice reply for " + msg.knowledge_id +
                                    " had no options or answer key; sent as text and left ungraded");
                e = make(EnvelopeType::Text, std::string(text::trim(reply)), "queue");
                expected.interaction = Interaction::Annotation;
            }
            break;
        }
        case Interaction::FillInBlanks:
            e = make(EnvelopeType::FillInBlanks, std::string(text::trim(reply)), "queue");
            e.blanks = blanks;
            expected.blanks = blanks->blanks;
            break;
        case Interaction::ShowCode:
            e = make(EnvelopeType::ShowCode, std::string(text::trim(reply)), "queue");
            e.code = code_block;
            break;
        case Interaction::PlainText:
        case Interaction::Annotation:
            e = make(EnvelopeType::Text, std::string(text::trim(reply)), "queue");
            break;
    }
    e.move = msg.move;
    e.knowledge_id = msg.knowledge_id;
    e.need_response = msg.need_response;

    std::string shown = e.body;
    for (const auto& o : e.options) shown += "\n" + o.label + ") " + o.text;
    if (e.blanks) shown += "\n" + e.blanks->display_line;
    history_.push_back({"assistant", shown});
    expected.question = shown;

    if (msg.need_response) {
        ++stats_.blocking_sent;
        phase_ = Phase::AwaitingResponse;
        expected_ = std::move(expected);
        pending_ = std::move(msg);
    } else {
        phase_ = Phase::Idle;
    }
    return finish(std::move(e));
}

void Session::record_observation(bool correct, student::Signal signal, EventResult& out) {
    student::Observation obs;
    obs.correct = correct;
    obs.source = signal;
    obs.anchor_text = pending_->anchor;
    in_.store->observe(in_.student_id, obs, *in_.gateway, &in_.config.bkt_defaults);
    ++stats_.model_updates;
    out.observation = std::move(obs);
}

Envelope Session::feedback(std::string body) {
    auto e = make(EnvelopeType::Text, std::move(body), "feedback");
    history_.push_back({"assistant", e.body});
    ++stats_.extras;
    return e;
}

Envelope Session::corrective(const InboundEvent& ev) {
    std::ostringstream p;
    p << "The student's code failed.\nError: " << ev.stderr_text << "\n";
    if (!ev.code.empty()) p << "Their code:\n" << ev.code << "\n";
    if (pending_) p << "Knowledge being practised: " << pending_->knowledge << "\n";
    p << "Point to the likely cause and suggest one concrete fix, without handing over the full solution.";
    auto e = make(EnvelopeType::Text, std::string(text::trim(generate("conversation.corrective", p.str()))),
                  "corrective");
    history_.push_back({"assistant", e.body});
    ++stats_.extras;
    return e;
}

EventResult Session::handle_event(const InboundEvent& ev) {
    EventResult out;
    switch (ev.type) {
        case EventType::VideoFinished:
        case EventType::GoOn:
            if (phase_ == Phase::AwaitingResponse)
                fail(ErrorCode::Phase, std::string(to_string(ev.type)) +
                                           " while a response is pending; answer the current message first");
            if (phase_ == Phase::AwaitingVideo) {
                phase_ = Phase::Sending;
                clip_pending_ = false;
                out.advanced = true;
            }
            return out;

        case EventType::StudentResponse: {
            if (phase_ != Phase::AwaitingResponse)
                fail(ErrorCode::Phase, "student_response in phase " + std::string(to_string(phase_)) +
                                           "; no message is waiting for an answer");
            if (expected_.interaction == Interaction::ShowCode)
                fail(ErrorCode::Phase, "the pending message asks for a code run; send code_execution instead");
            std::string said = ev.text;
            if (ev.choice) said = "choice: " + *ev.choice;
            if (!ev.blanks.empty()) {
                said = "blanks:";
                for (const auto& b : ev.blanks) said += " " + b;
            }
            history_.push_back({"user", said});
            ++stats_.responses;
            last_answer_ = said;
            const auto verdict = grade(expected_, ev, *in_.gateway);
            if (verdict) {
                record_observation(*verdict, student::Signal::Response, out);
                std::string body;
                switch (expected_.interaction) {
                    case Interaction::MultipleChoice:
                        body = *verdict ? "Correct, " + expected_.choice + " is right."
                                        : "Not quite. The answer is " + expected_.choice + ".";
                        break;
                    case Interaction::FillInBlanks: {
                        body = *verdict ? "All blanks are filled in correctly." : "Not quite. The blanks are:";
                        if (!*verdict)
                            for (std::size_t i = 0; i < expected_.blanks.size(); ++i)
                                body += " " + std::to_string(i + 1) + ") " + expected_.blanks[i];
                        break;
                    }
                    default:
                        body = *verdict ? "Well explained." : "Part of the idea is missing there; we will come back to it.";
                }
                out.replies.push_back(feedback(std::move(body)));
            }
            pending_.reset();
            phase_ = Phase::Sending;
            out.advanced = true;
            return out;
        }

        case EventType::CodeExecution: {
            const bool answers = phase_ == Phase::AwaitingResponse && expected_.interaction == Interaction::ShowCode;
            if (!answers && ev.success) return out;
            history_.push_back({"user", ev.success ? "[code ran]" : "[code failed] " + ev.stderr_text});
            if (answers) {
                ++stats_.responses;
                record_observation(ev.success, student::Signal::Response, out);
                out.replies.push_back(ev.success ? feedback("The code ran without errors.") : corrective(ev));
                pending_.reset();
                phase_ = Phase::Sending;
                out.advanced = true;
            } else {
                ++stats_.extras;
                out.replies.push_back(corrective(ev));
            }
            return out;
        }

        case EventType::Question: {
            history_.push_back({"user", ev.text});
            ++stats_.extras;
            std::ostringstream p;
            p << "The student asks: " << ev.text << "\n";
            if (phase_ == Phase::Done) {
                p << "The lesson is over; this is open exploration. Answer helpfully and suggest a direction to try.";
            } else {
                p << "Answer briefly, then steer back to the current step.";
                if (pending_) p << "\nCurrent knowledge: " << pending_->knowledge;
            }
            auto e = make(EnvelopeType::Text, std::string(text::trim(generate("conversation.help", p.str()))), "help");
            if (phase_ == Phase::Done) e.move = MentorMove::Exploration;
            history_.push_back({"assistant", e.body});
            ++stats_.extras;
            out.replies.push_back(std::move(e));
            return out;
        }
    }
    return out;
}

ReplayReport replay(Session& session, const std::vector<InboundEvent>& events) {
    ReplayReport report;
    std::size_t next = 0;
    const std::size_t guard = 100000;
    for (std::size_t n = 0; n < guard; ++n) {
        auto r = session.step();
        if (r.kind == StepResult::Kind::Message) {
            report.delivered.push_back(*r.envelope);
            continue;
        }
        if (next == events.size()) {
            if (r.kind == StepResult::Kind::Done) break;
            fail(ErrorCode::InvalidArgument, "event script ran out while the session is " +
                                                 std::string(to_string(session.phase())));
        }
        const auto& ev = events[next++];
        report.events.emplace_back(ev, session.handle_event(ev));
    }
    report.final_phase = session.phase();
    report.stats = session.stats();
    report.history_size = session.history().size();
    return report;
}

std::vector<InboundEvent> parse_event_script(const json& doc) {
    if (!doc.is_array()) fail(ErrorCode::Validation, "event script must be an array");
    std::vector<InboundEvent> out;
    for (const auto& j : doc) out.push_back(parse_event(j));
    return out;
}

ordered_json to_json(const ReplayReport& report) {
    ordered_json j;
    j["final_phase"] = to_string(report.final_phase);
    j["delivered"] = ordered_json::array();
    for (const auto& e : report.delivered) j["delivered"].push_back(to_json(e));
    j["events"] = ordered_json::array();
    for (const auto& [ev, res] : report.events) {
        ordered_json ej;
        ej["event"] = to_json(ev);
        ej["replies"] = ordered_json::array();
        for (const auto& e : res.replies) ej["replies"].push_back(to_json(e));
        if (res.observation)
            ej["observation"] = {{"correct", res.observation->correct}, {"anchor", res.observation->anchor_text}};
        j["events"].push_back(std::move(ej));
    }
    const auto& s = report.stats;
    j["stats"] = {{"initial_queue", s.initial_queue}, {"dequeued", s.dequeued},
                  {"blocking_sent", s.blocking_sent}, {"responses", s.responses},
                  {"extras", s.extras},               {"model_updates", s.model_updates},
                  {"queue_grew", s.queue_grew},       {"sent_while_blocked", s.sent_while_blocked}};
    j["history_size"] = report.history_size;
    return j;
}

}  // namespace apprentice::orchestrator
