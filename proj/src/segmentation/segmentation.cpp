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
#include "segmentation/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"
#include "gateway/reply_parse.hpp"

namespace apprentice::seg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double round_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

std::string transcript_listing(const ingest::Transcript& transcript) {
    std::ostringstream out;
    for (const auto& s : transcript) out << '[' << s.index << "] " << s.text << '\n';
    return out.str();
}

std::string normalize(std::string_view s) { return text::to_lower(text::normalize_whitespace(s)); }

// Pulls (label, text) out of a list element shaped as a pair, a tuple or an
// object keyed by one of `label_keys` / `text_keys`.
bool read_pair(const json& item, std::string& label, std::string& body, std::initializer_list<const char*> label_keys,
               std::initializer_list<const char*> text_keys) {
    if (item.is_array() && item.size() >= 2 && item[0].is_string() && item[1].is_string()) {
        label = item[0].get<std::string>();
        body = item[1].get<std::string>();
        return true;
    }
    if (!item.is_object()) return false;
    bool have_label = false;
    bool have_text = false;
    for (const char* k : label_keys)
        if (item.contains(k) && item[k].is_string()) {
            label = item[k].get<std::string>();
            have_label = true;
            break;
        }
    for (const char* k : text_keys)
        if (item.contains(k) && item[k].is_string()) {
            body = item[k].get<std::string>();
            have_text = true;
            break;
        }
    return have_label && have_text;
}

struct Concatenation {
    std::string text;
    std::vector<std::pair<std::size_t, std::size_t>> spans;  // [begin, end) per sentence

    explicit Concatenation(const ingest::Transcript& transcript) {
        for (const auto& s : transcript) {
            if (!text.empty()) text.push_back(' ');
            const auto begin = text.size();
            text += normalize(s.text);
            spans.emplace_back(begin, text.size());
        }
    }

    std::size_t sentence_at(std::size_t offset) const {
        for (std::size_t i = 0; i < spans.size(); ++i)
            if (offset < spans[i].second || i + 1 == spans.size()) return i;
        return spans.size() - 1;
    }

    std::size_t offset_of(std::size_t sentence) const { return spans.at(sentence).first; }
};

std::vector<std::string> passage_pieces(std::string_view passage) {
    std::string p = text::replace_all(std::string(passage), "\xE2\x80\xA6", "...");  // U+2026
    std::vector<std::string> pieces;
    std::size_t start = 0;
    for (;;) {
        const auto dots = p.find("...", start);
        auto piece = normalize(p.substr(start, dots == std::string::npos ? std::string::npos : dots - start));
        while (!piece.empty() && (piece.front() == '"' || piece.front() == '\'')) piece.erase(0, 1);
        while (!piece.empty() && (piece.back() == '"' || piece.back() == '\'')) piece.pop_back();
        piece = std::string(text::trim(piece));
        if (!piece.empty()) pieces.push_back(std::move(piece));
        if (dots == std::string::npos) break;
        start = dots + 3;
    }
    return pieces;
}

}  // namespace

std::string segment_key(std::string_view goal, double start_s) {
    return std::string(goal) + " - " + std::to_string(static_cast<long long>(std::floor(start_s)));
}

std::string VideoSegment::key() const { return segment_key(goal_name, start_s); }

std::vector<SegmentSummary> summarize(const ingest::Transcript& transcript,
                                      const std::vector<const ingest::LearningGoalDef*>& goals,
                                      std::string_view topic, gateway::Gateway& gw,
                                      std::vector<std::string>* warnings) {
    if (transcript.empty()) return {};
    if (goals.empty()) fail(ErrorCode::InvalidArgument, "summarize needs at least one enabled goal");

    std::ostringstream prompt;
    prompt << "Summarize the transcript of a tutorial video about " << topic << " by learning goal.\n\n"
           << "Learning goals, each with a short definition:\n";
    for (const auto* g : goals) prompt << "- " << g->name << ": " << g->description << '\n';
    prompt << "\nWrite one summary point for every stretch of the transcript that serves one of these goals. "
              "Goals can recur and the transcript need not follow the order above; give every occurrence its own "
              "point, and keep separate activities (two different charts, say) as separate points. Leave out "
              "goals that never occur.\n"
              "Reply with nothing but a list in order of appearance, like:\n"
              "[(\"<goal name>\", \"<summary>\"), ...]\n\nTranscript:\n"
           << transcript_listing(transcript);

    gateway::GenerationRequest req;
    req.stage = "segmentation.summarize";
    req.system_prompt = "You label tutorial transcripts by learning goal.";
    req.user_prompt = prompt.str();
    const auto reply = gw.generate(req);
    const auto list = gateway::parse_list_reply(reply);
    if (!list.is_array()) throw ParseError("summary reply is not a list", reply);

    std::vector<SegmentSummary> out;
    for (const auto& item : list) {
        std::string goal;
        std::string summary;
        if (!read_pair(item, goal, summary, {"category", "goal", "learning_goal"}, {"summary", "text"}))
            throw ParseError("summary list item is not a (goal, summary) pair", reply);
        const bool known = std::any_of(goals.begin(), goals.end(), [&](const auto* g) { return g->name == goal; });
        if (!known) {
            if (warnings) warnings->push_back("dropped summary for goal '" + goal + "' that is not enabled");
            continue;
        }
        out.push_back({goal, summary, out.size()});
    }
    return out;
}

RetrievedAnchor resolve_passage(const SegmentSummary& summary, std::string_view passage,
                                const ingest::Transcript& transcript, gateway::Gateway& gw, double similarity_floor,
                                std::size_t search_from) {
    RetrievedAnchor anchor;
    anchor.goal_name = summary.goal_name;
    anchor.summary = summary.summary;
    anchor.sentence_text = std::string(passage);
    if (transcript.empty()) fail(ErrorCode::UnresolvedAnchor, "cannot anchor '" + summary.summary + "': empty transcript");

    const Concatenation cat(transcript);
    const auto pieces = passage_pieces(passage);
    if (!pieces.empty()) {
        const auto from = search_from < transcript.size() ? cat.offset_of(search_from) : 0;
        auto first = cat.text.find(pieces.front(), from);
        if (first == std::string::npos) first = cat.text.find(pieces.front());
        if (first != std::string::npos) {
            auto end = first + pieces.front().size();
            if (pieces.size() > 1) {
                const auto last = cat.text.find(pieces.back(), end);
                if (last != std::string::npos) end = last + pieces.back().size();
            }
            const auto a = cat.sentence_at(first);
            const auto b = cat.sentence_at(end == 0 ? 0 : end - 1);
            for (auto i = a; i <= b; ++i) anchor.matched_indices.push_back(i);
            return anchor;
        }
    }

    const auto query = text::trim(passage).empty() ? std::string_view(summary.summary) : passage;
    const auto q = gw.embed(query);
    double best = -2.0;
    std::size_t best_index = 0;
    for (const auto& s : transcript) {
        if (text::trim(s.text).empty()) continue;
        const double c = gateway::cosine(q, gw.embed(s.text));
        if (c > best) {
            best = c;
            best_index = s.index;
        }
    }
    if (best < similarity_floor) {
        std::ostringstream msg;
        msg << "no transcript sentence reaches similarity " << similarity_floor << " for summary '"
            << summary.summary << "' (" << summary.goal_name << "); best " << best;
        fail(ErrorCode::UnresolvedAnchor, msg.str());
    }
    anchor.via_similarity = true;
    anchor.similarity = best;
    anchor.matched_indices = {best_index};
    return anchor;
}

std::vector<RetrievedAnchor> retrieve(const std::vector<SegmentSummary>& summaries,
                                      const ingest::Transcript& transcript, gateway::Gateway& gw,
                                      double similarity_floor, std::vector<std::string>* warnings) {
    if (summaries.empty()) return {};

    std::ostringstream prompt;
    prompt << "Retrieve the transcript passage behind each summary point.\n"
              "For every point, copy verbatim the consecutive captions where it happens.\n\nSummary points:\n";
    for (std::size_t i = 0; i < summaries.size(); ++i)
        prompt << i + 1 << ". [" << summaries[i].goal_name << "] " << summaries[i].summary << '\n';
    prompt << "\nReply with nothing but a list in the same order, like:\n"
              "[{\"category\": \"<goal name>\", \"sentence\": \"<passage>\"}, ...]\n\nTranscript:\n"
           << transcript_listing(transcript);

    gateway::GenerationRequest req;
    req.stage = "segmentation.retrieve";
    req.system_prompt = "You locate passages in tutorial transcripts.";
    req.user_prompt = prompt.str();
    const auto reply = gw.generate(req);
    const auto list = gateway::parse_list_reply(reply);

    std::vector<std::pair<std::string, std::string>> passages;
    for (const auto& item : list) {
        std::string goal;
        std::string passage;
        if (!read_pair(item, goal, passage, {"category", "goal"}, {"sentence", "passage", "text"}))
            throw ParseError("retrieval list item is not a (goal, passage) pair", reply);
        passages.emplace_back(std::move(goal), std::move(passage));
    }

    std::vector<RetrievedAnchor> anchors;
    std::vector<bool> used(passages.size(), false);
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        // Positional pairing when the goal agrees, else the next unused passage for that goal.
        std::optional<std::size_t> pick;
        if (i < passages.size() && !used[i] && passages[i].first == s.goal_name) pick = i;
        for (std::size_t j = 0; !pick && j < passages.size(); ++j)
            if (!used[j] && passages[j].first == s.goal_name) pick = j;
        std::string passage;
        if (pick) {
            used[*pick] = true;
            passage = passages[*pick].second;
        } else if (warnings) {
            warnings->push_back("no passage returned for summary " + std::to_string(i + 1) + "; matching the summary");
        }
        auto anchor = resolve_passage(s, passage, transcript, gw, similarity_floor, cursor);
        if (anchor.via_similarity && warnings) {
            std::ostringstream w;
            w << "summary " << i + 1 << " anchored by similarity " << anchor.similarity;
            warnings->push_back(w.str());
        }
        cursor = anchor.matched_indices.front();
        anchors.push_back(std::move(anchor));
    }
    return anchors;
}

std::vector<VideoSegment> rearrange(const std::vector<RetrievedAnchor>& anchors, const ingest::Transcript& transcript,
                                    std::vector<std::string>* warnings) {
    std::vector<VideoSegment> raw;
    for (const auto& a : anchors) {
        if (a.matched_indices.empty()) fail(ErrorCode::UnresolvedAnchor, "anchor for '" + a.summary + "' has no sentences");
        const auto [lo, hi] = std::minmax_element(a.matched_indices.begin(), a.matched_indices.end());
        if (*hi >= transcript.size()) fail(ErrorCode::InvalidArgument, "anchor index outside the transcript");
        VideoSegment s;
        s.goal_name = a.goal_name;
        s.summary = a.summary;
        s.first_index = *lo;
        s.last_index = *hi;
        raw.push_back(std::move(s));
    }
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        return a.first_index != b.first_index ? a.first_index < b.first_index : a.last_index < b.last_index;
    });

    std::vector<VideoSegment> out;
    std::vector<bool> truncated;
    for (auto& s : raw) {
        if (!out.empty()) {
            auto& prev = out.back();
            if (prev.goal_name == s.goal_name && s.first_index <= prev.last_index + 1) {
                prev.last_index = std::max(prev.last_index, s.last_index);
                if (!s.summary.empty() && s.summary != prev.summary) prev.summary += " " + s.summary;
                continue;
            }
            if (s.first_index <= prev.last_index) {
                if (warnings)
                    warnings->push_back("segment '" + prev.goal_name + "' overlaps '" + s.goal_name +
                                        "'; truncated at the later start");
                if (s.first_index == prev.first_index) {
                    out.pop_back();
                    truncated.pop_back();
                } else {
                    prev.last_index = s.first_index - 1;
                    truncated.back() = true;
                }
            }
        }
        out.push_back(std::move(s));
        truncated.push_back(false);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& s = out[i];
        s.start_s = round_ms(transcript[s.first_index].start_s);
        s.end_s = round_ms(transcript[s.last_index].end_s());
        if (truncated[i] && i + 1 < out.size()) s.end_s = std::min(s.end_s, round_ms(transcript[out[i + 1].first_index].start_s));
        s.end_s = std::max(s.end_s, s.start_s);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    return out;
}

std::vector<ingest::Transcript> chunk_transcript(const ingest::Transcript& transcript, double chunk_seconds) {
    std::vector<ingest::Transcript> chunks;
    if (transcript.empty()) return chunks;
    if (chunk_seconds <= 0) return {transcript};
    double window_start = transcript.front().start_s;
    for (const auto& s : transcript) {
        if (chunks.empty() || s.start_s >= window_start + chunk_seconds) {
            if (!chunks.empty()) window_start = s.start_s;
            chunks.emplace_back();
        }
        auto copy = s;
        copy.index = chunks.back().size();
        chunks.back().push_back(std::move(copy));
    }
    return chunks;
}

SegmentationResult segment_video(const ingest::Transcript& transcript, const ingest::ExpertConfig& config,
                                 gateway::Gateway& gw) {
    SegmentationResult result;
    if (transcript.empty()) return result;
    const auto goals = config.enabled_goals();
    std::size_t offset = 0;
    for (const auto& chunk : chunk_transcript(transcript, config.chunk_seconds)) {
        auto summaries = summarize(chunk, goals, config.topic, gw, &result.warnings);
        auto anchors = retrieve(summaries, chunk, gw, config.retrieve_similarity_floor, &result.warnings);
        for (auto& a : anchors)
            for (auto& i : a.matched_indices) i += offset;
        for (auto& s : summaries) {
            s.appearance_index = result.summaries.size();
            result.summaries.push_back(std::move(s));
        }
        for (auto& a : anchors) result.anchors.push_back(std::move(a));
        offset += chunk.size();
    }
    result.segments = rearrange(result.anchors, transcript, &result.warnings);
    return result;
}

ordered_json to_json(const std::vector<VideoSegment>& segments, bool detailed) {
    ordered_json arr = ordered_json::array();
    for (const auto& s : segments) {
        ordered_json j;
        j["category"] = s.goal_name;
        j["start"] = s.start_s;
        j["end"] = s.end_s;
        if (detailed) {
            j["summary"] = s.summary;
            j["sentence_range"] = {s.first_index, s.last_index};
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<VideoSegment> parse_segments(const json& doc, const ingest::Transcript& transcript) {
    if (!doc.is_array()) fail(ErrorCode::Validation, "segments file must be a JSON array");
    std::vector<VideoSegment> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& j = doc[i];
        const auto where = "segment " + std::to_string(i);
        if (!j.is_object() || !j.contains("category") || !j.contains("start") || !j.contains("end") ||
            !j["category"].is_string() || !j["start"].is_number() || !j["end"].is_number())
            fail(ErrorCode::Validation, where + ": needs string 'category' and numeric 'start'/'end'");
        VideoSegment s;
        s.goal_name = j["category"].get<std::string>();
        s.start_s = j["start"].get<double>();
        s.end_s = j["end"].get<double>();
        if (s.end_s < s.start_s) fail(ErrorCode::Validation, where + ": end precedes start");
        if (j.contains("summary") && j["summary"].is_string()) s.summary = j["summary"].get<std::string>();
        if (j.contains("sentence_range") && j["sentence_range"].is_array() && j["sentence_range"].size() == 2) {
            s.first_index = j["sentence_range"][0].get<std::size_t>();
            s.last_index = j["sentence_range"][1].get<std::size_t>();
        } else {
            bool found = false;
            for (const auto& t : transcript) {
                if (t.start_s + 1e-6 < s.start_s || t.start_s >= s.end_s) continue;
                if (!found) s.first_index = t.index;
                s.last_index = t.index;
                found = true;
            }
            if (!found) fail(ErrorCode::Validation, where + ": no transcript sentence falls inside its time range");
        }
        if (s.last_index >= transcript.size() || s.first_index > s.last_index)
            fail(ErrorCode::Validation, where + ": sentence range outside the transcript");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace apprentice::seg
