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
#include "dsl/dsl.hpp"

#include <algorithm>

#include "core/canonical_json.hpp"
#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::dsl {

using nlohmann::json;
using nlohmann::ordered_json;

const DslSegment* DslDocument::find(std::string_view key) const {
    for (const auto& s : segments)
        if (s.key == key) return &s;
    return nullptr;
}

std::size_t DslDocument::action_count() const {
    std::size_t n = 0;
    for (const auto& s : segments)
        for (const auto& e : s.entries) n += e.actions.size();
    return n;
}

const ingest::ActionTemplate& find_template(MentorMove move, Domain domain, std::optional<KnowledgeKind> kind,
                                            std::optional<Interaction> interaction,
                                            const std::vector<ingest::ActionTemplate>& action_set) {
    const ingest::ActionTemplate* generic = nullptr;
    for (const auto& t : action_set) {
        if (t.move != move || t.domain != domain) continue;
        if (interaction && t.interaction != *interaction) continue;
        if (t.knowledge_kind) {
            if (kind && *t.knowledge_kind == *kind) return t;
            continue;
        }
        if (generic == nullptr) generic = &t;
    }
    if (generic != nullptr) return *generic;
    std::string what = "no action template for (" + std::string(to_string(move)) + ", " +
                       std::string(to_string(domain));
    if (interaction) what += ", " + std::string(to_string(*interaction));
    if (kind) what += ", " + std::string(to_string(*kind));
    fail(ErrorCode::Coverage, what + ")");
}

namespace {

std::string_view interaction_phrase(Interaction i) {
    switch (i) {
        case Interaction::PlainText: return "a short plain-text message";
        case Interaction::MultipleChoice: return "a multiple-choice question";
        case Interaction::FillInBlanks: return "the code line with blanks {code-line-with-blanks}";
        case Interaction::ShowCode: return "the reference code {code-block}";
        case Interaction::Annotation: return "a description of where to look on the chart";
    }
    return "a short plain-text message";
}

std::string_view move_definition(MentorMove m) {
    switch (m) {
        case MentorMove::Modeling: return "show how an expert carries out";
        case MentorMove::Coaching: return "watch the student practise, with hints and feedback, on";
        case MentorMove::Scaffolding: return "support the student step by step, leaving room to work alone, on";
        case MentorMove::Articulation: return "have the student put into words their reasoning about";
        case MentorMove::Reflection: return "have the student check their own work against";
        case MentorMove::Exploration: return "invite the student to pursue their own questions beyond";
    }
    return "";
}

std::vector<std::string> unique_placeholders(std::string_view prompt) {
    std::vector<std::string> out;
    for (auto& p : text::placeholders(prompt))
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    return out;
}

}  // namespace

std::string derived_prompt(MentorMove move, Interaction interaction) {
    return "[Use " + std::string(interaction_phrase(interaction)) + " to " + std::string(move_definition(move)) +
           " the {knowledge}]";
}

bool derived_need_response(MentorMove move, Interaction interaction) noexcept {
    return interaction != Interaction::PlainText || move == MentorMove::Articulation;
}

ResolvedAction get_dsl(MentorMove move, Domain domain, const std::vector<ingest::ActionTemplate>& action_set,
                       std::optional<KnowledgeKind> kind, std::optional<Interaction> interaction) {
    const auto& t = find_template(move, domain, kind, interaction, action_set);
    ResolvedAction r;
    r.action = t.action;
    r.interaction = t.interaction;
    r.prompt = t.prompt.empty() ? derived_prompt(move, t.interaction) : t.prompt;
    r.parameters = t.prompt.empty() || t.parameters.empty() ? unique_placeholders(r.prompt) : t.parameters;
    r.need_response = t.need_response.value_or(derived_need_response(move, t.interaction));
    return r;
}

DslDocument compile(const std::vector<planner::MovePlan>& plans, const knowledge::KnowledgeMap& knowledge,
                    const std::vector<std::string>& segment_order,
                    const std::vector<ingest::ActionTemplate>& action_set) {
    std::map<std::string, const planner::MovePlan*> by_id;
    for (const auto& p : plans) {
        if (!by_id.emplace(p.knowledge_id, &p).second)
            fail(ErrorCode::Validation, "two plans for knowledge " + p.knowledge_id);
    }
    std::size_t used = 0;
    DslDocument doc;
    for (const auto& key : segment_order) {
        const auto it = knowledge.find(key);
        if (it == knowledge.end()) continue;
        auto items = it->second;
        std::stable_sort(items.begin(), items.end(),
                         [](const auto& a, const auto& b) { return a.order_index < b.order_index; });
        DslSegment segment;
        segment.key = key;
        for (const auto& item : items) {
            const auto plan = by_id.find(item.id);
            if (plan == by_id.end()) continue;
            ++used;
            DslEntry entry;
            entry.knowledge = knowledge::labelled_text(item.kind, item.text);
            for (auto move : plan->second->moves) {
                auto r = get_dsl(move, item.domain, action_set, item.kind);
                DslAction a;
                a.method = move;
                a.action = std::move(r.action);
                a.prompt = text::replace_all(r.prompt, "{knowledge}", entry.knowledge);
                a.interaction = r.interaction;
                a.parameters = std::move(r.parameters);
                a.need_response = r.need_response;
                entry.actions.push_back(std::move(a));
            }
            segment.entries.push_back(std::move(entry));
        }
        if (!segment.entries.empty()) doc.segments.push_back(std::move(segment));
    }
    if (used != plans.size()) {
        for (const auto& p : plans) {
            bool found = false;
            for (const auto& [key, items] : knowledge)
                for (const auto& item : items) found = found || item.id == p.knowledge_id;
            if (!found) fail(ErrorCode::Validation, "plan references unknown knowledge " + p.knowledge_id);
        }
        fail(ErrorCode::Validation, "plans reference knowledge of segments outside the segment order");
    }
    return doc;
}

ordered_json to_json(const DslAction& a) {
    ordered_json j;
    j["method"] = to_string(a.method);
    j["action"] = a.action;
    j["prompt"] = a.prompt;
    j["interaction"] = to_string(a.interaction);
    j["parameters"] = a.parameters;
    j["need-response"] = a.need_response;
    return j;
}

ordered_json to_json(const std::vector<DslEntry>& entries) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : entries) {
        ordered_json j;
        j["knowledge"] = e.knowledge;
        j["actions"] = ordered_json::array();
        for (const auto& a : e.actions) j["actions"].push_back(to_json(a));
        arr.push_back(std::move(j));
    }
    return arr;
}

ordered_json to_json(const DslDocument& doc) {
    ordered_json j = ordered_json::object();
    for (const auto& s : doc.segments) j[s.key] = to_json(s.entries);
    return j;
}

std::string serialize(const DslDocument& doc) { return canonical_dump(to_json(doc)); }
std::string serialize(const std::vector<DslEntry>& entries) { return canonical_dump(to_json(entries)); }

namespace {

const ordered_json& field(const ordered_json& j, const char* name, const std::string& where) {
    if (!j.is_object() || !j.contains(name)) fail(ErrorCode::Validation, where + ": missing '" + name + "'");
    return j[name];
}

std::string string_field(const ordered_json& j, const char* name, const std::string& where) {
    const auto& v = field(j, name, where);
    if (!v.is_string()) fail(ErrorCode::Validation, where + ": '" + name + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::vector<DslEntry> parse_entries(const ordered_json& arr) {
    if (!arr.is_array()) fail(ErrorCode::Validation, "DSL segment value must be an array of entries");
    std::vector<DslEntry> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto where = "DSL entry " + std::to_string(i);
        DslEntry e;
        e.knowledge = string_field(arr[i], "knowledge", where);
        const auto& actions = field(arr[i], "actions", where);
        if (!actions.is_array()) fail(ErrorCode::Validation, where + ": 'actions' must be an array");
        for (std::size_t k = 0; k < actions.size(); ++k) {
            const auto w = where + " action " + std::to_string(k);
            const auto& aj = actions[k];
            DslAction a;
            const auto method = parse_move(string_field(aj, "method", w));
            const auto interaction = parse_interaction(string_field(aj, "interaction", w));
            if (!method) fail(ErrorCode::Validation, w + ": unknown method");
            if (!interaction) fail(ErrorCode::Validation, w + ": unknown interaction");
            a.method = *method;
            a.interaction = *interaction;
            a.action = string_field(aj, "action", w);
            a.prompt = string_field(aj, "prompt", w);
            const auto& params = field(aj, "parameters", w);
            if (!params.is_array()) fail(ErrorCode::Validation, w + ": 'parameters' must be an array");
            for (const auto& p : params) {
                if (!p.is_string()) fail(ErrorCode::Validation, w + ": parameter names must be strings");
                a.parameters.push_back(p.get<std::string>());
            }
            const auto& nr = field(aj, "need-response", w);
            if (!nr.is_boolean()) fail(ErrorCode::Validation, w + ": 'need-response' must be a boolean");
            a.need_response = nr.get<bool>();
            for (const auto& ph : text::placeholders(a.prompt))
                if (std::find(a.parameters.begin(), a.parameters.end(), ph) == a.parameters.end())
                    fail(ErrorCode::Validation, w + ": placeholder {" + ph + "} is not a listed parameter");
            e.actions.push_back(std::move(a));
        }
        out.push_back(std::move(e));
    }
    return out;
}

DslDocument parse(const ordered_json& doc) {
    DslDocument out;
    if (doc.is_array()) {
        out.segments.push_back({"", parse_entries(doc)});
        return out;
    }
    if (!doc.is_object()) fail(ErrorCode::Validation, "DSL document must be an object or an array");
    for (auto it = doc.begin(); it != doc.end(); ++it) out.segments.push_back({it.key(), parse_entries(it.value())});
    return out;
}

DslDocument parse(std::string_view text) {
    auto j = ordered_json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Parse, "DSL text is not valid JSON");
    return parse(j);
}

std::vector<std::string> QueueMessage::unresolved() const {
    std::vector<std::string> out;
    for (const auto& p : parameters) {
        const auto it = bindings.find(p);
        if (it == bindings.end() || !it->second) out.push_back(p);
    }
    return out;
}

std::optional<QueueMessage> MessageQueue::dequeue() {
    if (messages_.empty()) return std::nullopt;
    auto m = std::move(messages_.front());
    messages_.pop_front();
    return m;
}

MessageQueue build_queue(const DslDocument& doc) {
    std::deque<QueueMessage> q;
    for (const auto& s : doc.segments) {
        for (std::size_t i = 0; i < s.entries.size(); ++i) {
            const auto& e = s.entries[i];
            const auto [label, body] = knowledge::strip_label(e.knowledge);
            const auto check = knowledge::classify(e.knowledge);
            for (const auto& a : e.actions) {
                QueueMessage m;
                m.move = a.method;
                m.action = a.action;
                m.interaction = a.interaction;
                m.prompt = a.prompt;
                m.parameters = a.parameters;
                m.need_response = a.need_response;
                m.knowledge_id = s.key + "#" + std::to_string(i);
                m.knowledge = e.knowledge;
                m.kind = label.value_or(check ? check.match->kind : KnowledgeKind::Declarative);
                m.anchor = check ? check.match->anchor_span : body;
                m.segment_key = s.key;
                for (const auto& p : a.parameters)
                    m.bindings[p] = p == kKnowledgeParameter ? std::optional<std::string>(e.knowledge) : std::nullopt;
                q.push_back(std::move(m));
            }
        }
    }
    return MessageQueue(std::move(q));
}

}  // namespace apprentice::dsl
