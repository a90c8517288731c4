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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/types.hpp"
#include "ingestion/transcript.hpp"

namespace apprentice::ingest {

struct CodeCell {
    std::string text;
    std::optional<std::string> label;

    bool operator==(const CodeCell&) const = default;
};

struct CodeArtifact {
    std::vector<CodeCell> cells;

    bool empty() const noexcept { return cells.empty(); }
    // Distinct identifiers in first-appearance order.
    std::vector<std::string> identifiers() const;
    bool operator==(const CodeArtifact&) const = default;
};

// Splits on R-markdown/markdown fences or "# %%" markers when present,
// otherwise on blank lines.
CodeArtifact parse_code(std::string_view content);

// Empty content is an error when the video has programming material.
CodeArtifact load_code(std::string_view source, VideoType video_type, const SourceOptions& options = {});
CodeArtifact code_from_text(std::string_view content, VideoType video_type);

}  // namespace apprentice::ingest
