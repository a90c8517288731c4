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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "gateway/gateway.hpp"
#include "ingestion/code.hpp"
#include "ingestion/config.hpp"
#include "ingestion/transcript.hpp"
#include "segmentation/segmentation.hpp"

namespace apprentice::knowledge {

struct KnowledgeItem {
    std::string id;  // "<segment key>#<order_index>"
    std::string segment_key;
    std::string goal_name;
    KnowledgeKind kind = KnowledgeKind::Declarative;
    Domain domain = Domain::ConceptRelated;
    std::string text;  // marker-free templated sentence
    std::string anchor_span;
    std::size_t order_index = 0;

    bool operator==(const KnowledgeItem&) const = default;
};

/// Slots recovered from a templated sentence. Slot names per template:
///   declarative/concept:     subject, clause
///   procedural/concept:      goal, actions, details
///   declarative/programming: goal, method, enhancement
///   procedural/programming:  goal, action, object, reason
struct TemplateMatch {
    KnowledgeKind kind = KnowledgeKind::Declarative;
    Domain domain = Domain::ConceptRelated;
    std::string text;  // input without '&' markers or a "<Kind> knowledge:" prefix
    std::map<std::string, std::string> slots;
    std::string anchor_span;
    bool marked = false;  // anchor came from an &...& pair

    bool operator==(const TemplateMatch&) const = default;
};

struct FormatCheck {
    std::optional<TemplateMatch> match;
    std::string diagnostic;  // set on rejection

    explicit operator bool() const noexcept { return match.has_value(); }
};

// Parses `text` against the (kind, domain) template.
FormatCheck validate_format(std::string_view text, KnowledgeKind kind, Domain domain);

// Tries every template of `domain` (both domains when absent); a leading
// "Declarative knowledge:" or "Procedural knowledge:" label fixes the kind.
FormatCheck classify(std::string_view text, std::optional<Domain> domain = std::nullopt);

std::string anchor_of(const KnowledgeItem& item);

// "Declarative knowledge: <text>", the form used inside DSL documents.
std::string labelled_text(KnowledgeKind kind, std::string_view text);
// Inverse of labelled_text; kind is absent when no label is present.
std::pair<std::optional<KnowledgeKind>, std::string> strip_label(std::string_view text);

struct Rejection {
    std::string reply_item;
    std::string reason;

    bool operator==(const Rejection&) const = default;
};

struct Extraction {
    std::vector<KnowledgeItem> items;
    std::vector<Rejection> rejections;
};

struct ExtractOptions {
    std::string topic;
    std::size_t max_items = 4;
};

/// Asks the gateway for templated knowledge sentences about one segment and
/// keeps those that validate. Concept segments keep exactly one procedural
/// item (the first valid one); extra items beyond max_items are dropped and
/// reported as rejections.
Extraction summarize_knowledge(const seg::VideoSegment& segment, const ingest::Transcript& transcript,
                               Domain domain, const ingest::CodeArtifact* code, const ExtractOptions& options,
                               gateway::Gateway& gw);

// Segment -> knowledge for a whole video, keyed by segment key.
using KnowledgeMap = std::map<std::string, std::vector<KnowledgeItem>>;

struct VideoExtraction {
    KnowledgeMap knowledge;
    std::vector<std::string> segment_order;  // keys by segment start
    std::map<std::string, std::vector<Rejection>> rejections;
};

VideoExtraction extract_video(const std::vector<seg::VideoSegment>& segments, const ingest::Transcript& transcript,
                              const ingest::ExpertConfig& config, const ingest::CodeArtifact& code,
                              gateway::Gateway& gw);

nlohmann::ordered_json to_json(const KnowledgeItem& item);
KnowledgeItem item_from_json(const nlohmann::json& j);

// {"<segment key>": [item, ...], ...} in segment order.
nlohmann::ordered_json to_json(const KnowledgeMap& map, const std::vector<std::string>& order);
// Returns items grouped by key plus the key order as written.
std::pair<KnowledgeMap, std::vector<std::string>> parse_knowledge(const nlohmann::json& doc);

}  // namespace apprentice::knowledge
