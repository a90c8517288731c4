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
#include "student/student_model.hpp"

#include <chrono>
#include <cmath>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::student {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Signal s) noexcept {
    switch (s) {
        case Signal::Video: return "video";
        case Signal::Response: return "response";
        case Signal::Error: return "error";
        case Signal::Help: return "help";
    }
    return "response";
}

std::optional<Signal> parse_signal(std::string_view s) noexcept {
    for (auto v : {Signal::Video, Signal::Response, Signal::Error, Signal::Help})
        if (to_string(v) == s) return v;
    return std::nullopt;
}

double bkt_posterior(double p, double slip, double guess, bool correct) {
    const double num = correct ? p * (1.0 - slip) : p * slip;
    const double den = correct ? num + (1.0 - p) * guess : num + (1.0 - p) * (1.0 - guess);
    if (!(den > 0.0) || !std::isfinite(den)) {
        fail(ErrorCode::NumericDegenerate, "BKT denominator is zero (p=" + std::to_string(p) +
                                               ", slip=" + std::to_string(slip) + ", guess=" + std::to_string(guess) + ")");
    }
    return num / den;
}

KnowledgeComponentState bkt_update(const KnowledgeComponentState& state, bool correct) {
    auto next = state;
    const double post = bkt_posterior(state.p_mastery, state.p_slip, state.p_guess, correct);
    next.p_mastery = post + (1.0 - post) * state.p_transit;
    ++next.attempts;
    return next;
}

std::optional<Nearest> nearest(const StudentModel& model, const gateway::Embedding& query) {
    std::optional<Nearest> best;
    for (std::size_t i = 0; i < model.components.size(); ++i) {
        const double c = gateway::cosine(query, model.components[i].embedding);
        if (!best || c > best->similarity) best = Nearest{i, c};
    }
    return best;
}

namespace {

std::int64_t now_epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

bool is_gateway_failure(const Error& e) { return e.code() == ErrorCode::Gateway; }

ObserveResult apply(StudentModel& model, const Observation& obs, const gateway::Embedding& e,
                    const ingest::BktParams& defaults, std::int64_t now_ms) {
    ObserveResult r;
    r.applied = true;
    const auto near = nearest(model, e);
    if (near && near->similarity >= model.similarity_threshold) {
        auto& c = model.components[near->index];
        c = bkt_update(c, obs.correct);
        if (obs.anchor_text != c.anchor_text &&
            std::find(c.aliases.begin(), c.aliases.end(), obs.anchor_text) == c.aliases.end())
            c.aliases.push_back(obs.anchor_text);
        c.last_updated_ms = now_ms;
        r.component = near->index;
        return r;
    }
    KnowledgeComponentState c;
    c.anchor_text = obs.anchor_text;
    c.embedding = e;
    c.p_mastery = defaults.p_mastery;
    c.p_transit = defaults.p_transit;
    c.p_slip = defaults.p_slip;
    c.p_guess = defaults.p_guess;
    c = bkt_update(c, obs.correct);
    c.last_updated_ms = now_ms;
    model.components.push_back(std::move(c));
    r.component = model.components.size() - 1;
    r.created = true;
    return r;
}

}  // namespace

ObserveResult observe(StudentModel& model, const Observation& obs, gateway::Gateway& gw,
                      const ingest::BktParams& defaults, std::int64_t now_ms) {
    if (text::trim(obs.anchor_text).empty()) fail(ErrorCode::InvalidArgument, "observation anchor is empty");
    if (now_ms == 0) now_ms = now_epoch_ms();

    std::size_t flushed = 0;
    try {
        for (; flushed < model.deferred.size(); ++flushed) {
            const auto& d = model.deferred[flushed];
            apply(model, d, gw.embed(d.anchor_text), defaults, now_ms);
        }
    } catch (const Error& e) {
        if (!is_gateway_failure(e)) throw;
        model.deferred.erase(model.deferred.begin(), model.deferred.begin() + static_cast<std::ptrdiff_t>(flushed));
        model.deferred.push_back(obs);
        return {};
    }
    model.deferred.clear();

    gateway::Embedding e;
    try {
        e = gw.embed(obs.anchor_text);
    } catch (const Error& err) {
        if (!is_gateway_failure(err)) throw;
        model.deferred.push_back(obs);
        return {};
    }
    return apply(model, obs, e, defaults, now_ms);
}

std::optional<double> mastery_of(const StudentModel& model, std::string_view anchor_text, gateway::Gateway& gw) {
    if (model.components.empty() || text::trim(anchor_text).empty()) return std::nullopt;
    const auto near = nearest(model, gw.embed(anchor_text));
    if (!near || near->similarity < model.similarity_threshold) return std::nullopt;
    return model.components[near->index].p_mastery;
}

bool weak(double p, const ingest::Thresholds& t) noexcept { return p < t.weak; }
bool mastered(double p, const ingest::Thresholds& t) noexcept { return p > t.strong; }
bool fading(double p, const ingest::Thresholds& t) noexcept { return p > t.fade; }

ordered_json to_json(const StudentModel& model) {
    ordered_json j;
    j["student_id"] = model.student_id;
    j["similarity_threshold"] = model.similarity_threshold;
    j["components"] = ordered_json::array();
    for (const auto& c : model.components) {
        ordered_json cj;
        cj["anchor"] = c.anchor_text;
        cj["aliases"] = c.aliases;
        cj["p_mastery"] = c.p_mastery;
        cj["p_transit"] = c.p_transit;
        cj["p_slip"] = c.p_slip;
        cj["p_guess"] = c.p_guess;
        cj["attempts"] = c.attempts;
        cj["last_updated_ms"] = c.last_updated_ms;
        cj["embedding"] = c.embedding;
        j["components"].push_back(std::move(cj));
    }
    j["deferred"] = ordered_json::array();
    for (const auto& d : model.deferred)
        j["deferred"].push_back({{"anchor", d.anchor_text}, {"correct", d.correct}, {"signal", to_string(d.source)}});
    return j;
}

StudentModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("student_id") || !j["student_id"].is_string())
        fail(ErrorCode::Validation, "student model needs a string 'student_id'");
    StudentModel m;
    m.student_id = j["student_id"].get<std::string>();
    m.similarity_threshold = j.value("similarity_threshold", 0.80);
    if (j.contains("components")) {
        for (const auto& cj : j["components"]) {
            KnowledgeComponentState c;
            c.anchor_text = cj.at("anchor").get<std::string>();
            if (cj.contains("aliases")) c.aliases = cj["aliases"].get<std::vector<std::string>>();
            c.p_mastery = cj.at("p_mastery").get<double>();
            c.p_transit = cj.at("p_transit").get<double>();
            c.p_slip = cj.at("p_slip").get<double>();
            c.p_guess = cj.at("p_guess").get<double>();
            c.attempts = cj.value("attempts", 0u);
            c.last_updated_ms = cj.value("last_updated_ms", std::int64_t{0});
            c.embedding = cj.at("embedding").get<gateway::Embedding>();
            for (double p : {c.p_mastery, c.p_transit, c.p_slip, c.p_guess})
                if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::Validation, "component probability outside [0,1]");
            m.components.push_back(std::move(c));
        }
    }
    if (j.contains("deferred")) {
        for (const auto& dj : j["deferred"]) {
            Observation o;
            o.anchor_text = dj.at("anchor").get<std::string>();
            o.correct = dj.at("correct").get<bool>();
            o.source = parse_signal(dj.value("signal", std::string("response"))).value_or(Signal::Response);
            m.deferred.push_back(std::move(o));
        }
    }
    return m;
}

void validate_student_id(std::string_view id) {
    if (id.empty() || id.size() > 128 || id.front() == '.')
        fail(ErrorCode::InvalidArgument, "invalid student id '" + std::string(id) + "'");
    for (char c : id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_' || c == '.';
        if (!ok) fail(ErrorCode::InvalidArgument, "invalid student id '" + std::string(id) + "'");
    }
}

StudentStore::StudentStore(std::filesystem::path data_dir, ingest::BktParams defaults, double similarity_threshold)
    : dir_(std::move(data_dir) / "students"), defaults_(defaults), similarity_threshold_(similarity_threshold) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
}

std::filesystem::path StudentStore::path_of(const std::string& student_id) const {
    validate_student_id(student_id);
    return dir_ / (student_id + ".json");
}

std::shared_mutex& StudentStore::lock_for(const std::string& student_id) {
    std::lock_guard g(locks_mutex_);
    auto& slot = locks_[student_id];
    if (!slot) slot = std::make_unique<std::shared_mutex>();
    return *slot;
}

StudentModel StudentStore::load(const std::string& student_id) const {
    const auto path = path_of(student_id);
    if (!std::filesystem::exists(path)) {
        StudentModel m;
        m.student_id = student_id;
        m.similarity_threshold = similarity_threshold_;
        return m;
    }
    auto j = json::parse(fsutil::read_file(path), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Parse, "student file " + path.string() + " is not valid JSON");
    auto m = model_from_json(j);
    if (m.student_id != student_id) fail(ErrorCode::Validation, "student file " + path.string() + " names another id");
    return m;
}

void StudentStore::save(const StudentModel& model) const {
    fsutil::write_file_atomic(path_of(model.student_id), to_json(model).dump(2));
}

ObserveResult StudentStore::observe(const std::string& student_id, const Observation& obs, gateway::Gateway& gw,
                                    const ingest::BktParams* defaults) {
    std::unique_lock lock(lock_for(student_id));
    auto model = load(student_id);
    auto r = student::observe(model, obs, gw, defaults != nullptr ? *defaults : defaults_);
    save(model);
    return r;
}

std::optional<double> StudentStore::mastery_of(const std::string& student_id, std::string_view anchor,
                                               gateway::Gateway& gw) {
    std::shared_lock lock(lock_for(student_id));
    return student::mastery_of(load(student_id), anchor, gw);
}

StudentModel StudentStore::snapshot(const std::string& student_id) {
    std::shared_lock lock(lock_for(student_id));
    return load(student_id);
}

}  // namespace apprentice::student
