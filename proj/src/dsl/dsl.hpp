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

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "ingestion/config.hpp"
#include "knowledge/knowledge.hpp"
#include "planner/planner.hpp"

namespace apprentice::dsl {

struct DslAction {
    MentorMove method = MentorMove::Scaffolding;
    std::string action;
    std::string prompt;
    Interaction interaction = Interaction::PlainText;
    std::vector<std::string> parameters;
    bool need_response = false;

    bool operator==(const DslAction&) const = default;
};

struct DslEntry {
    std::string knowledge;  // "<Kind> knowledge: <sentence>"
    std::vector<DslAction> actions;

    bool operator==(const DslEntry&) const = default;
};

struct DslSegment {
    std::string key;  // "<goal> - <floor(start)>"
    std::vector<DslEntry> entries;

    bool operator==(const DslSegment&) const = default;
};

struct DslDocument {
    std::vector<DslSegment> segments;

    const DslSegment* find(std::string_view key) const;
    std::size_t action_count() const;
    bool operator==(const DslDocument&) const = default;
};

struct ResolvedAction {
    std::string action;
    Interaction interaction = Interaction::PlainText;
    std::string prompt;
    std::vector<std::string> parameters;
    bool need_response = false;
};

// Parameters the compiler binds itself; every other placeholder is filled
// by the orchestrator when the message is sent.
inline constexpr std::string_view kKnowledgeParameter = "knowledge";

/// Template lookup for one move. A template restricted to `kind` wins over an
/// unrestricted one; `interaction`, when given, must match. Throws a
/// coverage error naming the (move, domain) pair when nothing fits.
const ingest::ActionTemplate& find_template(MentorMove move, Domain domain, std::optional<KnowledgeKind> kind,
                                            std::optional<Interaction> interaction,
                                            const std::vector<ingest::ActionTemplate>& action_set);

/// Prompt, need_response and parameters for one move. An empty template
/// prompt is derived as "[Use <interaction> to <move definition> ...]".
ResolvedAction get_dsl(MentorMove move, Domain domain, const std::vector<ingest::ActionTemplate>& action_set,
                       std::optional<KnowledgeKind> kind = std::nullopt,
                       std::optional<Interaction> interaction = std::nullopt);

std::string derived_prompt(MentorMove move, Interaction interaction);
bool derived_need_response(MentorMove move, Interaction interaction) noexcept;

DslDocument compile(const std::vector<planner::MovePlan>& plans, const knowledge::KnowledgeMap& knowledge,
                    const std::vector<std::string>& segment_order,
                    const std::vector<ingest::ActionTemplate>& action_set);

nlohmann::ordered_json to_json(const DslAction& a);
nlohmann::ordered_json to_json(const std::vector<DslEntry>& entries);
nlohmann::ordered_json to_json(const DslDocument& doc);

// Canonical text: authored key order, 4-space indent, scalar arrays inline.
std::string serialize(const DslDocument& doc);
std::string serialize(const std::vector<DslEntry>& entries);

std::vector<DslEntry> parse_entries(const nlohmann::ordered_json& arr);
// Accepts an object keyed by segment, or a bare entry array (stored under "").
DslDocument parse(const nlohmann::ordered_json& doc);
DslDocument parse(std::string_view text);

struct QueueMessage {
    MentorMove move = MentorMove::Scaffolding;
    std::string action;
    Interaction interaction = Interaction::PlainText;
    std::string prompt;
    std::vector<std::string> parameters;
    // Empty optional: bound at send time.
    std::map<std::string, std::optional<std::string>> bindings;
    bool need_response = false;
    std::string knowledge_id;  // "<segment key>#<entry index>"
    std::string knowledge;
    std::string anchor;
    KnowledgeKind kind = KnowledgeKind::Declarative;
    std::string segment_key;

    std::vector<std::string> unresolved() const;
    bool operator==(const QueueMessage&) const = default;
};

/// FIFO of pending messages. Dequeue is destructive; an empty queue yields
/// nullopt rather than an error.
class MessageQueue {
public:
    MessageQueue() = default;
    explicit MessageQueue(std::deque<QueueMessage> messages) : messages_(std::move(messages)) {}

    std::optional<QueueMessage> dequeue();
    const QueueMessage* peek() const { return messages_.empty() ? nullptr : &messages_.front(); }
    std::size_t size() const noexcept { return messages_.size(); }
    bool empty() const noexcept { return messages_.empty(); }
    const std::deque<QueueMessage>& messages() const noexcept { return messages_; }

private:
    std::deque<QueueMessage> messages_;
};

MessageQueue build_queue(const DslDocument& doc);

}  // namespace apprentice::dsl
