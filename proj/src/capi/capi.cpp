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
#include <apprentice/apprentice.h>

#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "core/canonical_json.hpp"
#include "core/error.hpp"
#include "core/text.hpp"
#include "dsl/dsl.hpp"
#include "eval/eval.hpp"
#include "gateway/live_gateway.hpp"
#include "gateway/mock_gateway.hpp"
#include "ingestion/code.hpp"
#include "ingestion/config.hpp"
#include "ingestion/transcript.hpp"
#include "knowledge/knowledge.hpp"
#include "orchestrator/orchestrator.hpp"
#include "planner/planner.hpp"
#include "segmentation/segmentation.hpp"
#include "service/http.hpp"
#include "service/pipeline.hpp"
#include "service/service.hpp"
#include "student/student_model.hpp"

using namespace apprentice;
using nlohmann::json;
using nlohmann::ordered_json;

struct apprentice_config {
    ingest::ExpertConfig config;
    bool offline = false;
};

struct apprentice_gateway {
    gateway::GatewayPtr gw;
};

struct apprentice_service {
    std::unique_ptr<service::Service> service;
    std::unique_ptr<service::HttpServer> http;
    std::mutex mutex;
};

namespace {

thread_local std::string g_last_error;

apprentice_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return APPRENTICE_E_INVALID_ARGUMENT;
        case ErrorCode::Validation: return APPRENTICE_E_VALIDATION;
        case ErrorCode::Io: return APPRENTICE_E_IO;
        case ErrorCode::Parse: return APPRENTICE_E_PARSE;
        case ErrorCode::Gateway: return APPRENTICE_E_GATEWAY;
        case ErrorCode::MockExhausted: return APPRENTICE_E_MOCK_EXHAUSTED;
        case ErrorCode::Coverage: return APPRENTICE_E_COVERAGE;
        case ErrorCode::UnresolvedAnchor: return APPRENTICE_E_UNRESOLVED_ANCHOR;
        case ErrorCode::UnresolvedParameter: return APPRENTICE_E_UNRESOLVED_PARAMETER;
        case ErrorCode::NumericDegenerate: return APPRENTICE_E_NUMERIC_DEGENERATE;
        case ErrorCode::Phase: return APPRENTICE_E_PHASE;
        case ErrorCode::NotFound: return APPRENTICE_E_NOT_FOUND;
        case ErrorCode::Internal: return APPRENTICE_E_INTERNAL;
    }
    return APPRENTICE_E_INTERNAL;
}

// Runs `f`, translating every exception into a status plus a thread-local message.
template <typename F>
apprentice_status guarded(F&& f) {
    g_last_error.clear();
    try {
        f();
        return APPRENTICE_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const json::exception& e) {
        g_last_error = e.what();
        return APPRENTICE_E_PARSE;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return APPRENTICE_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return APPRENTICE_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return APPRENTICE_E_INTERNAL;
    }
}

char* dup(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void need(const void* p, const char* what) {
    if (p == nullptr) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

json parse_json(const char* text, const char* what) {
    need(text, what);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Parse, std::string(what) + " is not valid JSON");
    return j;
}

ingest::SourceOptions sources_of(const apprentice_config* c) { return {c->config.base_dir, c->offline}; }

ingest::Transcript transcript_of(const apprentice_config* c) {
    if (c->config.transcript_source.empty()) fail(ErrorCode::InvalidArgument, "config names no transcript_source");
    return ingest::load_transcript(c->config.transcript_source, sources_of(c));
}

ingest::CodeArtifact code_of(const apprentice_config* c) {
    if (c->config.code_source.empty()) return ingest::code_from_text("", c->config.video_type);
    return ingest::load_code(c->config.code_source, c->config.video_type, sources_of(c));
}

}  // namespace

extern "C" {

const char* apprentice_version(void) { return "0.1.0"; }

const char* apprentice_status_name(apprentice_status status) {
    switch (status) {
        case APPRENTICE_OK: return "ok";
        case APPRENTICE_E_INVALID_ARGUMENT: return "invalid_argument";
        case APPRENTICE_E_VALIDATION: return "validation";
        case APPRENTICE_E_IO: return "io";
        case APPRENTICE_E_PARSE: return "parse";
        case APPRENTICE_E_GATEWAY: return "gateway";
        case APPRENTICE_E_MOCK_EXHAUSTED: return "mock_exhausted";
        case APPRENTICE_E_COVERAGE: return "coverage";
        case APPRENTICE_E_UNRESOLVED_ANCHOR: return "unresolved_anchor";
        case APPRENTICE_E_UNRESOLVED_PARAMETER: return "unresolved_parameter";
        case APPRENTICE_E_NUMERIC_DEGENERATE: return "numeric_degenerate";
        case APPRENTICE_E_PHASE: return "phase";
        case APPRENTICE_E_NOT_FOUND: return "not_found";
        case APPRENTICE_E_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* apprentice_last_error(void) { return g_last_error.c_str(); }

void apprentice_string_free(char* s) { std::free(s); }

apprentice_status apprentice_config_load(const char* path, apprentice_config** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        auto c = std::make_unique<apprentice_config>();
        c->config = ingest::load_config(path);
        *out = c.release();
    });
}

apprentice_status apprentice_config_parse(const char* text, const char* base_dir, apprentice_config** out) {
    return guarded([&] {
        need(text, "json");
        need(out, "out");
        auto c = std::make_unique<apprentice_config>();
        c->config = ingest::parse_config_text(text);
        c->config.base_dir = base_dir != nullptr ? std::filesystem::path(base_dir) : std::filesystem::path(".");
        *out = c.release();
    });
}

apprentice_status apprentice_config_to_json(const apprentice_config* config, char** out_json) {
    return guarded([&] {
        need(config, "config");
        need(out_json, "out_json");
        *out_json = dup(canonical_dump(ingest::to_json(config->config)));
    });
}

apprentice_status apprentice_config_set_offline(apprentice_config* config, int offline) {
    return guarded([&] {
        need(config, "config");
        config->offline = offline != 0;
    });
}

void apprentice_config_free(apprentice_config* config) { delete config; }

apprentice_status apprentice_gateway_mock(const char* script_json, apprentice_gateway** out) {
    return guarded([&] {
        need(out, "out");
        auto script = script_json != nullptr ? gateway::parse_mock_script(script_json) : gateway::MockScript{};
        *out = new apprentice_gateway{std::make_shared<gateway::MockGateway>(std::move(script))};
    });
}

apprentice_status apprentice_gateway_mock_file(const char* script_path, apprentice_gateway** out) {
    return guarded([&] {
        need(script_path, "script_path");
        need(out, "out");
        *out = new apprentice_gateway{std::make_shared<gateway::MockGateway>(gateway::load_mock_script(script_path))};
    });
}

apprentice_status apprentice_gateway_from_config(const apprentice_config* config, const char* mock_script_path,
                                                 apprentice_gateway** out) {
    return guarded([&] {
        need(config, "config");
        need(out, "out");
        *out = new apprentice_gateway{
            gateway::make_gateway(config->config.gateway, mock_script_path != nullptr ? mock_script_path : "")};
    });
}

void apprentice_gateway_free(apprentice_gateway* gateway) { delete gateway; }

apprentice_status apprentice_segment(const apprentice_config* config, apprentice_gateway* gateway,
                                     const char* transcript_path, int detailed, char** out_json) {
    return guarded([&] {
        need(config, "config");
        need(gateway, "gateway");
        need(out_json, "out_json");
        const auto transcript = transcript_path != nullptr
                                    ? ingest::load_transcript(transcript_path, {{}, config->offline})
                                    : transcript_of(config);
        const auto result = seg::segment_video(transcript, config->config, *gateway->gw);
        *out_json = dup(canonical_dump(seg::to_json(result.segments, detailed != 0)));
    });
}

apprentice_status apprentice_extract(const apprentice_config* config, apprentice_gateway* gateway,
                                     const char* segments_json, char** out_json) {
    return guarded([&] {
        need(config, "config");
        need(gateway, "gateway");
        need(out_json, "out_json");
        const auto transcript = transcript_of(config);
        const auto segments = seg::parse_segments(parse_json(segments_json, "segments_json"), transcript);
        const auto code = code_of(config);
        const auto x = knowledge::extract_video(segments, transcript, config->config, code, *gateway->gw);
        *out_json = dup(canonical_dump(knowledge::to_json(x.knowledge, x.segment_order)));
    });
}

apprentice_status apprentice_plan(const apprentice_config* config, const char* knowledge_json,
                                  const char* mastery_json, const char* history_json, char** out_json) {
    return guarded([&] {
        need(config, "config");
        need(out_json, "out_json");
        const auto [map, order] = knowledge::parse_knowledge(parse_json(knowledge_json, "knowledge_json"));
        planner::MasteryMap mastery;
        if (mastery_json != nullptr) {
            const auto m = parse_json(mastery_json, "mastery_json");
            if (!m.is_object()) fail(ErrorCode::Validation, "mastery must be an object of id -> probability");
            for (auto it = m.begin(); it != m.end(); ++it) {
                if (!it.value().is_number()) fail(ErrorCode::Validation, "mastery of " + it.key() + " is not a number");
                mastery[it.key()] = it.value().get<double>();
            }
        }
        auto history = history_json != nullptr ? planner::parse_history(parse_json(history_json, "history_json"))
                                               : planner::MoveHistory{};
        std::vector<knowledge::KnowledgeItem> items;
        for (const auto& key : order)
            for (const auto& item : map.at(key)) items.push_back(item);
        const auto plans = planner::plan(items, mastery, history, planner::options_from(config->config));
        ordered_json j;
        j["plans"] = planner::to_json(plans);
        j["history"] = planner::to_json(history);
        *out_json = dup(canonical_dump(j));
    });
}

apprentice_status apprentice_compile_dsl(const apprentice_config* config, const char* knowledge_json,
                                         const char* plans_json, char** out_dsl) {
    return guarded([&] {
        need(config, "config");
        need(out_dsl, "out_dsl");
        const auto [map, order] = knowledge::parse_knowledge(parse_json(knowledge_json, "knowledge_json"));
        auto plans_doc = parse_json(plans_json, "plans_json");
        if (plans_doc.is_object() && plans_doc.contains("plans")) plans_doc = plans_doc["plans"];
        const auto plans = planner::parse_plans(plans_doc);
        *out_dsl = dup(dsl::serialize(dsl::compile(plans, map, order, config->config.action_set)));
    });
}

apprentice_status apprentice_replay(const apprentice_config* config, apprentice_gateway* gateway,
                                    const char* dsl_json, const char* segments_json, const char* events_json,
                                    const char* data_dir, const char* student_id, char** out_report) {
    return guarded([&] {
        need(config, "config");
        need(gateway, "gateway");
        need(data_dir, "data_dir");
        need(student_id, "student_id");
        need(out_report, "out_report");
        const auto events = orchestrator::parse_event_script(parse_json(events_json, "events_json"));
        student::StudentStore store(data_dir, config->config.bkt_defaults, config->config.similarity_threshold);

        orchestrator::SessionInputs in;
        in.session_id = "replay";
        in.student_id = student_id;
        in.config = config->config;
        in.gateway = gateway->gw;
        in.store = &store;
        in.seed = config->config.session_seed;
        if (dsl_json == nullptr) {
            auto r = service::run_pipeline(config->config, *gateway->gw, store, student_id, sources_of(config));
            in.dsl = std::move(r.dsl);
            in.segments = std::move(r.segmentation.segments);
            in.code = std::move(r.code);
        } else {
            in.dsl = dsl::parse(std::string_view(dsl_json));
            in.code = code_of(config);
            if (segments_json != nullptr)
                in.segments = seg::parse_segments(parse_json(segments_json, "segments_json"), transcript_of(config));
        }
        orchestrator::Session session(std::move(in));
        const auto report = orchestrator::replay(session, events);
        auto j = orchestrator::to_json(report);
        j["warnings"] = session.warnings();
        j["student_model"] = student::to_json(store.snapshot(student_id));
        *out_report = dup(canonical_dump(j));
    });
}

apprentice_status apprentice_eval_segmentation(const char* predicted_json, const char* gold_json, double margin_s,
                                               char** out_json) {
    return guarded([&] {
        need(out_json, "out_json");
        const auto pred = eval::parse_labeled_segments(parse_json(predicted_json, "predicted_json"));
        const auto gold = eval::parse_labeled_segments(parse_json(gold_json, "gold_json"));
        auto j = eval::to_json(eval::segmentation_accuracy(pred, gold, margin_s));
        j["margin_s"] = margin_s;
        *out_json = dup(canonical_dump(j));
    });
}

apprentice_status apprentice_eval_intents(const char* predicted_json, const char* gold_json, const char* topic,
                                          char** out_json) {
    return guarded([&] {
        need(out_json, "out_json");
        const auto pairs =
            eval::align(parse_json(predicted_json, "predicted_json"), parse_json(gold_json, "gold_json"));
        const auto rep = eval::report({{topic != nullptr ? topic : "corpus", pairs}});
        ordered_json j;
        j["report"] = eval::to_json(rep);
        j["table"] = eval::render_table(rep);
        *out_json = dup(canonical_dump(j));
    });
}

apprentice_status apprentice_bkt_update(double p_mastery, double p_transit, double p_slip, double p_guess,
                                        int correct, double* out_p_mastery) {
    return guarded([&] {
        need(out_p_mastery, "out_p_mastery");
        for (double p : {p_mastery, p_transit, p_slip, p_guess})
            if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "probabilities must lie in [0,1]");
        student::KnowledgeComponentState s;
        s.p_mastery = p_mastery;
        s.p_transit = p_transit;
        s.p_slip = p_slip;
        s.p_guess = p_guess;
        *out_p_mastery = student::bkt_update(s, correct != 0).p_mastery;
    });
}

apprentice_status apprentice_service_create(const char* options_json, apprentice_service** out) {
    return guarded([&] {
        need(out, "out");
        service::ServiceOptions o;
        if (options_json != nullptr) {
            const auto j = parse_json(options_json, "options_json");
            if (!j.is_object()) fail(ErrorCode::Validation, "service options must be an object");
            o.data_dir = j.value("data_dir", o.data_dir.string());
            o.mock_script = j.value("mock_script", o.mock_script);
            o.config_root = j.value("config_root", o.config_root.string());
            o.offline = j.value("offline", o.offline);
            o.token = j.value("token", o.token);
            o.max_wait_ms = j.value("max_wait_ms", o.max_wait_ms);
        }
        auto s = std::make_unique<apprentice_service>();
        s->service = std::make_unique<service::Service>(std::move(o));
        *out = s.release();
    });
}

apprentice_status apprentice_service_request(apprentice_service* svc, const char* method, const char* path,
                                             const char* body, int* out_status, char** out_body) {
    return guarded([&] {
        need(svc, "service");
        need(method, "method");
        need(path, "path");
        need(out_status, "out_status");
        need(out_body, "out_body");
        const auto reply = svc->service->dispatch(method, path, body != nullptr ? body : "");
        *out_body = dup(reply.body.dump());
        *out_status = reply.status;
    });
}

apprentice_status apprentice_service_start(apprentice_service* svc, const char* host, int port, int* out_port) {
    return guarded([&] {
        need(svc, "service");
        std::lock_guard g(svc->mutex);
        if (svc->http) fail(ErrorCode::Phase, "service is already serving");
        svc->http = std::make_unique<service::HttpServer>(*svc->service);
        const int bound = svc->http->start(host != nullptr ? host : "127.0.0.1", port);
        if (out_port != nullptr) *out_port = bound;
    });
}

apprentice_status apprentice_service_run(apprentice_service* svc, const char* host, int port) {
    return guarded([&] {
        need(svc, "service");
        service::HttpServer* server = nullptr;
        {
            std::lock_guard g(svc->mutex);
            if (svc->http) fail(ErrorCode::Phase, "service is already serving");
            svc->http = std::make_unique<service::HttpServer>(*svc->service);
            server = svc->http.get();
        }
        server->run(host != nullptr ? host : "127.0.0.1", port);
    });
}

void apprentice_service_stop(apprentice_service* svc) {
    if (svc == nullptr) return;
    std::lock_guard g(svc->mutex);
    if (svc->http) svc->http->stop();
}

void apprentice_service_free(apprentice_service* svc) {
    if (svc == nullptr) return;
    apprentice_service_stop(svc);
    delete svc;
}

}  // extern "C"
