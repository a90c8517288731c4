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
#include "ingestion/code.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::ingest {

namespace {

std::vector<std::string> split_lines(std::string_view content) {
    std::vector<std::string> lines;
    std::string line;
    std::istringstream in{std::string(content)};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

void push_cell(std::vector<CodeCell>& cells, std::vector<std::string>& buffer, std::optional<std::string> label) {
    while (!buffer.empty() && text::trim(buffer.back()).empty()) buffer.pop_back();
    auto first = std::find_if(buffer.begin(), buffer.end(), [](const auto& l) { return !text::trim(l).empty(); });
    if (first != buffer.end()) {
        std::string joined;
        for (auto it = first; it != buffer.end(); ++it) {
            if (!joined.empty()) joined.push_back('\n');
            joined += *it;
        }
        cells.push_back({std::move(joined), std::move(label)});
    }
    buffer.clear();
}

// "```{r label, echo=FALSE}" -> "label"; "```python" -> nullopt
std::optional<std::string> fence_label(std::string_view header) {
    const auto open = header.find('{');
    if (open == std::string_view::npos) return std::nullopt;
    auto inner = header.substr(open + 1);
    if (const auto close = inner.find('}'); close != std::string_view::npos) inner = inner.substr(0, close);
    const auto parts = text::split_whitespace(text::replace_all(std::string(inner), ",", " "));
    if (parts.size() >= 2 && parts[1].find('=') == std::string::npos) return parts[1];
    return std::nullopt;
}

}  // namespace

CodeArtifact parse_code(std::string_view content) {
    const auto lines = split_lines(content);
    CodeArtifact out;
    std::vector<std::string> buffer;

    const bool fenced = std::any_of(lines.begin(), lines.end(),
                                    [](const auto& l) { return text::trim(l).starts_with("```"); });
    if (fenced) {
        bool inside = false;
        std::optional<std::string> label;
        for (const auto& l : lines) {
            const auto t = text::trim(l);
            if (t.starts_with("```")) {
                if (inside) {
                    push_cell(out.cells, buffer, label);
                    inside = false;
                } else {
                    inside = true;
                    label = fence_label(t);
                    buffer.clear();
                }
                continue;
            }
            if (inside) buffer.push_back(l);
        }
        if (inside) push_cell(out.cells, buffer, label);
        return out;
    }

    const bool marked = std::any_of(lines.begin(), lines.end(),
                                    [](const auto& l) { return text::trim(l).starts_with("# %%"); });
    if (marked) {
        std::optional<std::string> label;
        for (const auto& l : lines) {
            const auto t = text::trim(l);
            if (t.starts_with("# %%")) {
                push_cell(out.cells, buffer, label);
                const auto rest = text::trim(t.substr(4));
                label = rest.empty() ? std::nullopt : std::optional<std::string>(std::string(rest));
                continue;
            }
            buffer.push_back(l);
        }
        push_cell(out.cells, buffer, label);
        return out;
    }

    for (const auto& l : lines) {
        if (text::trim(l).empty()) {
            push_cell(out.cells, buffer, std::nullopt);
            continue;
        }
        buffer.push_back(l);
    }
    push_cell(out.cells, buffer, std::nullopt);
    return out;
}

CodeArtifact code_from_text(std::string_view content, VideoType video_type) {
    auto artifact = parse_code(content);
    if (artifact.empty() && video_type != VideoType::ConceptRelated)
        fail(ErrorCode::Validation, "code artifact is empty but the video has programming material");
    return artifact;
}

CodeArtifact load_code(std::string_view source, VideoType video_type, const SourceOptions& options) {
    if (source.empty()) return code_from_text("", video_type);
    return code_from_text(fetch_source(source, options), video_type);
}

std::vector<std::string> CodeArtifact::identifiers() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& cell : cells)
        for (auto& id : text::identifiers(cell.text))
            if (seen.insert(id).second) out.push_back(std::move(id));
    return out;
}

}  // namespace apprentice::ingest
