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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace apprentice {

enum class Domain { ConceptRelated, ProgrammingRelated };
enum class VideoType { ConceptRelated, ProgrammingRelated, Mixed };
enum class KnowledgeKind { Declarative, Procedural };

enum class MentorMove { Modeling, Coaching, Scaffolding, Articulation, Reflection, Exploration };

inline constexpr std::array<MentorMove, 6> kAllMoves = {
    MentorMove::Modeling,     MentorMove::Coaching,   MentorMove::Scaffolding,
    MentorMove::Articulation, MentorMove::Reflection, MentorMove::Exploration};

enum class Interaction { PlainText, MultipleChoice, FillInBlanks, ShowCode, Annotation };

inline constexpr std::array<Interaction, 5> kAllInteractions = {
    Interaction::PlainText, Interaction::MultipleChoice, Interaction::FillInBlanks,
    Interaction::ShowCode, Interaction::Annotation};

std::string_view to_string(Domain d) noexcept;
std::string_view to_string(VideoType v) noexcept;
std::string_view to_string(KnowledgeKind k) noexcept;
std::string_view to_string(MentorMove m) noexcept;

// Hyphenated wire label ("fill-in-blanks"), as written in DSL documents.
std::string_view to_string(Interaction i) noexcept;
// Underscored label ("fill_in_blanks"), as used in config and envelopes.
std::string_view to_identifier(Interaction i) noexcept;

std::optional<Domain> parse_domain(std::string_view s) noexcept;
std::optional<VideoType> parse_video_type(std::string_view s) noexcept;
std::optional<KnowledgeKind> parse_knowledge_kind(std::string_view s) noexcept;
std::optional<MentorMove> parse_move(std::string_view s) noexcept;
// Accepts both hyphenated and underscored spellings.
std::optional<Interaction> parse_interaction(std::string_view s) noexcept;

}  // namespace apprentice
