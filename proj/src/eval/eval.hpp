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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace apprentice::eval {

struct LabeledSegment {
    std::string goal;
    double start_s = 0.0;
    double end_s = 0.0;
    bool operator==(const LabeledSegment&) const = default;
};

// Array of {category, start, end}, the segment CLI's output format.
std::vector<LabeledSegment> parse_labeled_segments(const nlohmann::json& doc);

struct SegmentationScore {
    double accuracy = 0.0;
    std::size_t matched = 0;
    std::size_t gold_count = 0;
    std::size_t predicted_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (predicted, gold)
};

/// Greedy one-to-one matching within goal names: each gold segment, in time
/// order, takes the unused prediction with the smallest total endpoint error,
/// provided both endpoints lie within `margin_s`. Accuracy is matched over
/// gold count.
SegmentationScore segmentation_accuracy(std::vector<LabeledSegment> predicted, std::vector<LabeledSegment> gold,
                                        double margin_s = 5.0);

enum class Layer { Knowledge, Method, Action, Interaction };
inline constexpr std::array<Layer, 4> kLayers = {Layer::Knowledge, Layer::Method, Layer::Action, Layer::Interaction};
std::string_view to_string(Layer l) noexcept;

struct IntentLabel {
    std::string knowledge;    // Declarative | Procedural
    std::string method;       // mentor move, Exploration excluded
    std::string action;       // TaskControl | Comprehension | CodeRunCode | Feedback
    std::string interaction;  // hyphenated interaction label
    const std::string& at(Layer l) const;
    bool operator==(const IntentLabel&) const = default;
};

// Validates and normalizes spelling of every layer.
IntentLabel parse_label(const nlohmann::json& j);

struct LabeledUtterance {
    std::string utterance_id;
    IntentLabel gold;       // from the DSL
    IntentLabel predicted;  // from annotation of what was actually said
};

/// Pairs two label files by utterance_id. Each file is an array of
/// {utterance_id, knowledge, method, action|intent, interaction}; ids must
/// align one to one.
std::vector<LabeledUtterance> align(const nlohmann::json& predicted, const nlohmann::json& gold);

struct ClassScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t gold_count = 0;
    std::size_t predicted_count = 0;
    std::size_t true_positive = 0;
};

struct Macro {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct LayerMetrics {
    Layer layer = Layer::Knowledge;
    std::size_t n = 0;
    std::map<std::string, ClassScore> classes;  // classes present in gold or predictions
    std::optional<Macro> macro;                 // absent when no class is shared
    std::string error;                          // why the macro is absent
};

/// One-vs-rest scores per class and their unweighted mean. Throws on an
/// empty pair list.
LayerMetrics intent_metrics(const std::vector<LabeledUtterance>& pairs, Layer layer);

struct TopicReport {
    std::string topic;
    std::array<LayerMetrics, 4> layers;
};

std::vector<TopicReport> report(const std::vector<std::pair<std::string, std::vector<LabeledUtterance>>>& corpora);
std::string render_table(const std::vector<TopicReport>& report);

nlohmann::ordered_json to_json(const SegmentationScore& s);
nlohmann::ordered_json to_json(const LayerMetrics& m);
nlohmann::ordered_json to_json(const std::vector<TopicReport>& report);

}  // namespace apprentice::eval
