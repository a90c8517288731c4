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
#include "eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"
#include "core/types.hpp"

namespace apprentice::eval {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<LabeledSegment> parse_labeled_segments(const json& doc) {
    if (!doc.is_array()) fail(ErrorCode::Validation, "segment labels must be an array");
    std::vector<LabeledSegment> out;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& j = doc[i];
        const auto where = "segment " + std::to_string(i);
        if (!j.is_object()) fail(ErrorCode::Validation, where + " is not an object");
        LabeledSegment s;
        if (j.contains("category") && j["category"].is_string()) {
            s.goal = j["category"].get<std::string>();
        } else if (j.contains("goal") && j["goal"].is_string()) {
            s.goal = j["goal"].get<std::string>();
        } else {
            fail(ErrorCode::Validation, where + " needs 'category'");
        }
        if (!j.contains("start") || !j["start"].is_number() || !j.contains("end") || !j["end"].is_number())
            fail(ErrorCode::Validation, where + " needs numeric 'start' and 'end'");
        s.start_s = j["start"].get<double>();
        s.end_s = j["end"].get<double>();
        if (s.end_s < s.start_s) fail(ErrorCode::Validation, where + " ends before it starts");
        out.push_back(std::move(s));
    }
    return out;
}

SegmentationScore segmentation_accuracy(std::vector<LabeledSegment> predicted, std::vector<LabeledSegment> gold,
                                        double margin_s) {
    if (!(margin_s >= 0.0)) fail(ErrorCode::InvalidArgument, "margin must be non-negative");
    auto by_start = [](const LabeledSegment& a, const LabeledSegment& b) { return a.start_s < b.start_s; };
    std::stable_sort(predicted.begin(), predicted.end(), by_start);
    std::stable_sort(gold.begin(), gold.end(), by_start);

    // Absorbs binary noise such as 437.0 - 432.0 landing a hair above 5.
    const double limit = margin_s + 1e-9;
    SegmentationScore out;
    out.gold_count = gold.size();
    out.predicted_count = predicted.size();
    std::vector<bool> used(predicted.size(), false);
    for (std::size_t g = 0; g < gold.size(); ++g) {
        std::optional<std::size_t> best;
        double best_cost = 0.0;
        for (std::size_t p = 0; p < predicted.size(); ++p) {
            if (used[p] || predicted[p].goal != gold[g].goal) continue;
            const double ds = std::abs(predicted[p].start_s - gold[g].start_s);
            const double de = std::abs(predicted[p].end_s - gold[g].end_s);
            if (ds > limit || de > limit) continue;
            if (!best || ds + de < best_cost) {
                best = p;
                best_cost = ds + de;
            }
        }
        if (best) {
            used[*best] = true;
            out.pairs.emplace_back(*best, g);
        }
    }
    out.matched = out.pairs.size();
    if (gold.empty()) {
        out.accuracy = predicted.empty() ? 1.0 : 0.0;
    } else {
        out.accuracy = static_cast<double>(out.matched) / static_cast<double>(gold.size());
    }
    return out;
}

std::string_view to_string(Layer l) noexcept {
    switch (l) {
        case Layer::Knowledge: return "Knowledge";
        case Layer::Method: return "Method";
        case Layer::Action: return "Action";
        case Layer::Interaction: return "Interaction";
    }
    return "Knowledge";
}

const std::string& IntentLabel::at(Layer l) const {
    switch (l) {
        case Layer::Knowledge: return knowledge;
        case Layer::Method: return method;
        case Layer::Action: return action;
        case Layer::Interaction: return interaction;
    }
    return knowledge;
}

namespace {

std::string string_of(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
    for (const char* k : keys)
        if (j.contains(k) && j[k].is_string()) return j[k].get<std::string>();
    fail(ErrorCode::Validation, where + ": missing '" + *keys.begin() + "'");
}

std::string canonical_action(std::string_view s) {
    static const std::array<std::string_view, 4> kActions = {"TaskControl", "Comprehension", "CodeRunCode",
                                                             "Feedback"};
    std::string squashed;
    for (char c : s)
        if (std::isalnum(static_cast<unsigned char>(c)) != 0) squashed.push_back(static_cast<char>(std::tolower(c)));
    for (auto a : kActions)
        if (text::to_lower(a) == squashed) return std::string(a);
    return {};
}

}  // namespace

IntentLabel parse_label(const json& j) {
    if (!j.is_object()) fail(ErrorCode::Validation, "intent label must be an object");
    const std::string where = "label";
    IntentLabel out;
    const auto kind = parse_knowledge_kind(text::to_lower(string_of(j, {"knowledge"}, where)));
    if (!kind) fail(ErrorCode::Validation, "unknown knowledge label '" + j["knowledge"].dump() + "'");
    out.knowledge = *kind == KnowledgeKind::Declarative ? "Declarative" : "Procedural";

    const auto method_text = string_of(j, {"method"}, where);
    const auto move = parse_move(method_text);
    if (!move) fail(ErrorCode::Validation, "unknown method label '" + method_text + "'");
    if (*move == MentorMove::Exploration)
        fail(ErrorCode::Validation, "Exploration is not an evaluated method label");
    out.method = std::string(to_string(*move));

    const auto action_text = string_of(j, {"action", "intent"}, where);
    out.action = canonical_action(action_text);
    if (out.action.empty()) fail(ErrorCode::Validation, "unknown action label '" + action_text + "'");

    const auto interaction_text = string_of(j, {"interaction"}, where);
    const auto interaction = parse_interaction(text::to_lower(interaction_text));
    if (!interaction) fail(ErrorCode::Validation, "unknown interaction label '" + interaction_text + "'");
    out.interaction = std::string(to_string(*interaction));
    return out;
}

namespace {

std::vector<std::pair<std::string, IntentLabel>> parse_label_file(const json& doc, const char* which) {
    if (!doc.is_array()) fail(ErrorCode::Validation, std::string(which) + " labels must be an array");
    std::vector<std::pair<std::string, IntentLabel>> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& j = doc[i];
        const auto where = std::string(which) + " utterance " + std::to_string(i);
        if (!j.is_object() || !j.contains("utterance_id"))
            fail(ErrorCode::Validation, where + " needs 'utterance_id'");
        const auto id = j["utterance_id"].is_string() ? j["utterance_id"].get<std::string>() : j["utterance_id"].dump();
        if (!seen.insert(id).second) fail(ErrorCode::Validation, where + " repeats id " + id);
        try {
            out.emplace_back(id, parse_label(j.contains("label") ? j["label"] : j));
        } catch (const Error& e) {
            fail(ErrorCode::Validation, where + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<LabeledUtterance> align(const json& predicted, const json& gold) {
    const auto p = parse_label_file(predicted, "predicted");
    const auto g = parse_label_file(gold, "gold");
    std::map<std::string, const IntentLabel*> by_id;
    for (const auto& [id, label] : p) by_id[id] = &label;
    if (p.size() != g.size())
        fail(ErrorCode::Validation, "label files differ in size (" + std::to_string(p.size()) + " predicted, " +
                                        std::to_string(g.size()) + " gold)");
    std::vector<LabeledUtterance> out;
    for (const auto& [id, label] : g) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) fail(ErrorCode::Validation, "utterance " + id + " has no predicted label");
        out.push_back({id, label, *it->second});
    }
    return out;
}

LayerMetrics intent_metrics(const std::vector<LabeledUtterance>& pairs, Layer layer) {
    if (pairs.empty()) fail(ErrorCode::InvalidArgument, "intent metrics need at least one utterance");
    LayerMetrics m;
    m.layer = layer;
    m.n = pairs.size();
    std::set<std::string> in_gold;
    std::set<std::string> in_pred;
    for (const auto& u : pairs) {
        const auto& g = u.gold.at(layer);
        const auto& p = u.predicted.at(layer);
        in_gold.insert(g);
        in_pred.insert(p);
        ++m.classes[g].gold_count;
        ++m.classes[p].predicted_count;
        if (g == p) ++m.classes[g].true_positive;
    }
    for (auto& [name, c] : m.classes) {
        c.precision = c.predicted_count == 0 ? 0.0 : static_cast<double>(c.true_positive) / c.predicted_count;
        c.recall = c.gold_count == 0 ? 0.0 : static_cast<double>(c.true_positive) / c.gold_count;
        c.f1 = c.precision + c.recall == 0.0 ? 0.0 : 2.0 * c.precision * c.recall / (c.precision + c.recall);
    }
    std::vector<std::string> shared;
    std::set_intersection(in_gold.begin(), in_gold.end(), in_pred.begin(), in_pred.end(), std::back_inserter(shared));
    if (shared.empty()) {
        m.error = std::string(to_string(layer)) + ": gold and predicted labels share no class; macro average undefined";
        return m;
    }
    Macro macro;
    for (const auto& [name, c] : m.classes) {
        macro.precision += c.precision;
        macro.recall += c.recall;
        macro.f1 += c.f1;
    }
    const auto k = static_cast<double>(m.classes.size());
    macro.precision /= k;
    macro.recall /= k;
    macro.f1 /= k;
    m.macro = macro;
    return m;
}

std::vector<TopicReport> report(const std::vector<std::pair<std::string, std::vector<LabeledUtterance>>>& corpora) {
    if (corpora.empty()) fail(ErrorCode::InvalidArgument, "report needs at least one labelled corpus");
    std::vector<TopicReport> out;
    for (const auto& [topic, pairs] : corpora) {
        if (pairs.empty()) fail(ErrorCode::InvalidArgument, "corpus '" + topic + "' is empty");
        TopicReport t;
        t.topic = topic;
        for (std::size_t i = 0; i < kLayers.size(); ++i) t.layers[i] = intent_metrics(pairs, kLayers[i]);
        out.push_back(std::move(t));
    }
    return out;
}

std::string render_table(const std::vector<TopicReport>& rep) {
    std::ostringstream s;
    s << std::left << std::setw(24) << "topic";
    for (auto l : kLayers) s << std::setw(27) << (std::string(to_string(l)) + " P/R/F1");
    s << "\n";
    s << std::fixed << std::setprecision(3);
    for (const auto& t : rep) {
        s << std::setw(24) << t.topic;
        for (const auto& m : t.layers) {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(3);
            if (m.macro) {
                cell << m.macro->precision << " / " << m.macro->recall << " / " << m.macro->f1;
            } else {
                cell << "undefined";
            }
            s << std::setw(27) << cell.str();
        }
        s << "\n";
    }
    return s.str();
}

ordered_json to_json(const SegmentationScore& s) {
    ordered_json j;
    j["accuracy"] = s.accuracy;
    j["matched"] = s.matched;
    j["gold"] = s.gold_count;
    j["predicted"] = s.predicted_count;
    j["pairs"] = ordered_json::array();
    for (const auto& [p, g] : s.pairs) j["pairs"].push_back({{"predicted", p}, {"gold", g}});
    return j;
}

ordered_json to_json(const LayerMetrics& m) {
    ordered_json j;
    j["layer"] = to_string(m.layer);
    j["n"] = m.n;
    j["classes"] = ordered_json::object();
    for (const auto& [name, c] : m.classes)
        j["classes"][name] = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                              {"gold", c.gold_count},     {"predicted", c.predicted_count}};
    if (m.macro) {
        j["macro"] = {{"precision", m.macro->precision}, {"recall", m.macro->recall}, {"f1", m.macro->f1}};
    } else {
        j["macro"] = nullptr;
        j["error"] = m.error;
    }
    return j;
}

ordered_json to_json(const std::vector<TopicReport>& rep) {
    ordered_json arr = ordered_json::array();
    for (const auto& t : rep) {
        ordered_json j;
        j["topic"] = t.topic;
        j["layers"] = ordered_json::array();
        for (const auto& m : t.layers) j["layers"].push_back(to_json(m));
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace apprentice::eval
