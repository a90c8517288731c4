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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gateway/gateway.hpp"
#include "ingestion/config.hpp"

namespace apprentice::student {

enum class Signal { Video, Response, Error, Help };

std::string_view to_string(Signal s) noexcept;
std::optional<Signal> parse_signal(std::string_view s) noexcept;

struct KnowledgeComponentState {
    std::string anchor_text;
    std::vector<std::string> aliases;  // other anchors merged into this one
    gateway::Embedding embedding;
    double p_mastery = 0.1;
    double p_transit = 0.1;
    double p_slip = 0.1;
    double p_guess = 0.2;
    std::uint32_t attempts = 0;
    std::int64_t last_updated_ms = 0;  // unix epoch

    bool operator==(const KnowledgeComponentState&) const = default;
};

struct Observation {
    bool correct = false;
    Signal source = Signal::Response;
    std::string anchor_text;

    bool operator==(const Observation&) const = default;
};

/// Posterior of mastery given one observed outcome.
double bkt_posterior(double p, double slip, double guess, bool correct);

/// Posterior followed by the transit step p + (1 - p) * p_transit. Throws a
/// numeric-degenerate error when the posterior denominator vanishes.
KnowledgeComponentState bkt_update(const KnowledgeComponentState& state, bool correct);

struct StudentModel {
    std::string student_id;
    std::vector<KnowledgeComponentState> components;
    double similarity_threshold = 0.80;
    // Observations waiting for the embedding backend to come back.
    std::vector<Observation> deferred;

    bool operator==(const StudentModel&) const = default;
};

struct Nearest {
    std::size_t index = 0;
    double similarity = -1.0;
};

// Brute-force cosine scan over the component set; absent when empty.
std::optional<Nearest> nearest(const StudentModel& model, const gateway::Embedding& query);

struct ObserveResult {
    bool applied = false;  // false: deferred
    std::optional<std::size_t> component;
    bool created = false;
};

/// Knowledge-tracing update. Merges into the nearest component within the similarity
/// threshold or creates one from `defaults`. Earlier deferred observations
/// are replayed first; when the embedding call fails this one is queued.
ObserveResult observe(StudentModel& model, const Observation& obs, gateway::Gateway& gw,
                      const ingest::BktParams& defaults, std::int64_t now_ms = 0);

std::optional<double> mastery_of(const StudentModel& model, std::string_view anchor_text, gateway::Gateway& gw);

bool weak(double p, const ingest::Thresholds& t) noexcept;
bool mastered(double p, const ingest::Thresholds& t) noexcept;
bool fading(double p, const ingest::Thresholds& t) noexcept;

nlohmann::ordered_json to_json(const StudentModel& model);
StudentModel model_from_json(const nlohmann::json& j);

/// File-per-student store under <data_dir>/students. Writes are atomic
/// (temp file, fsync, rename). Access is serialized per student: writers
/// take an exclusive lock, readers a shared one.
class StudentStore {
public:
    StudentStore(std::filesystem::path data_dir, ingest::BktParams defaults, double similarity_threshold);

    StudentModel load(const std::string& student_id) const;  // fresh model when unknown
    void save(const StudentModel& model) const;

    // Observe and persist before returning. `defaults` overrides the store's
    // priors for components this observation creates.
    ObserveResult observe(const std::string& student_id, const Observation& obs, gateway::Gateway& gw,
                          const ingest::BktParams* defaults = nullptr);
    std::optional<double> mastery_of(const std::string& student_id, std::string_view anchor, gateway::Gateway& gw);
    StudentModel snapshot(const std::string& student_id);

    std::filesystem::path path_of(const std::string& student_id) const;
    const ingest::BktParams& defaults() const noexcept { return defaults_; }

private:
    std::shared_mutex& lock_for(const std::string& student_id);

    std::filesystem::path dir_;
    ingest::BktParams defaults_;
    double similarity_threshold_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::shared_mutex>> locks_;
};

// Student ids become file names; letters, digits, '-', '_' and '.' only.
void validate_student_id(std::string_view id);

}  // namespace apprentice::student
