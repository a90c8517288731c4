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
#include "core/types.hpp"

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::Validation: return "validation";
        case ErrorCode::Io: return "io";
        case ErrorCode::Parse: return "parse";
        case ErrorCode::Gateway: return "gateway";
        case ErrorCode::MockExhausted: return "mock_exhausted";
        case ErrorCode::Coverage: return "coverage";
        case ErrorCode::UnresolvedAnchor: return "unresolved_anchor";
        case ErrorCode::UnresolvedParameter: return "unresolved_parameter";
        case ErrorCode::NumericDegenerate: return "numeric_degenerate";
        case ErrorCode::Phase: return "phase";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

std::string_view to_string(Domain d) noexcept {
    return d == Domain::ConceptRelated ? "concept_related" : "programming_related";
}

std::string_view to_string(VideoType v) noexcept {
    switch (v) {
        case VideoType::ConceptRelated: return "concept_related";
        case VideoType::ProgrammingRelated: return "programming_related";
        case VideoType::Mixed: return "mixed";
    }
    return "mixed";
}

std::string_view to_string(KnowledgeKind k) noexcept {
    return k == KnowledgeKind::Declarative ? "declarative" : "procedural";
}

std::string_view to_string(MentorMove m) noexcept {
    switch (m) {
        case MentorMove::Modeling: return "Modeling";
        case MentorMove::Coaching: return "Coaching";
        case MentorMove::Scaffolding: return "Scaffolding";
        case MentorMove::Articulation: return "Articulation";
        case MentorMove::Reflection: return "Reflection";
        case MentorMove::Exploration: return "Exploration";
    }
    return "Exploration";
}

std::string_view to_string(Interaction i) noexcept {
    switch (i) {
        case Interaction::PlainText: return "plain-text";
        case Interaction::MultipleChoice: return "multiple-choice";
        case Interaction::FillInBlanks: return "fill-in-blanks";
        case Interaction::ShowCode: return "show-code";
        case Interaction::Annotation: return "annotation";
    }
    return "annotation";
}

std::string_view to_identifier(Interaction i) noexcept {
    switch (i) {
        case Interaction::PlainText: return "plain_text";
        case Interaction::MultipleChoice: return "multiple_choice";
        case Interaction::FillInBlanks: return "fill_in_blanks";
        case Interaction::ShowCode: return "show_code";
        case Interaction::Annotation: return "annotation";
    }
    return "annotation";
}

std::optional<Domain> parse_domain(std::string_view s) noexcept {
    if (s == "concept_related" || s == "concept-related" || s == "concept") return Domain::ConceptRelated;
    if (s == "programming_related" || s == "programming-related" || s == "programming")
        return Domain::ProgrammingRelated;
    return std::nullopt;
}

std::optional<VideoType> parse_video_type(std::string_view s) noexcept {
    if (s == "mixed") return VideoType::Mixed;
    if (auto d = parse_domain(s))
        return *d == Domain::ConceptRelated ? VideoType::ConceptRelated : VideoType::ProgrammingRelated;
    return std::nullopt;
}

std::optional<KnowledgeKind> parse_knowledge_kind(std::string_view s) noexcept {
    const auto lower = text::to_lower(s);
    if (lower == "declarative") return KnowledgeKind::Declarative;
    if (lower == "procedural") return KnowledgeKind::Procedural;
    return std::nullopt;
}

std::optional<MentorMove> parse_move(std::string_view s) noexcept {
    const auto lower = text::to_lower(s);
    for (auto m : kAllMoves)
        if (text::to_lower(to_string(m)) == lower) return m;
    return std::nullopt;
}

std::optional<Interaction> parse_interaction(std::string_view s) noexcept {
    for (auto i : kAllInteractions)
        if (to_string(i) == s || to_identifier(i) == s) return i;
    return std::nullopt;
}

}  // namespace apprentice
