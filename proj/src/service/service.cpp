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
#include "service/service.hpp"

#include <random>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"
#include "gateway/live_gateway.hpp"
#include "gateway/mock_gateway.hpp"

namespace apprentice::service {

using nlohmann::json;
using nlohmann::ordered_json;

int status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::Validation:
        case ErrorCode::Parse:
        case ErrorCode::Coverage: return 400;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::Phase: return 409;
        case ErrorCode::UnresolvedAnchor:
        case ErrorCode::UnresolvedParameter: return 422;
        case ErrorCode::Gateway:
        case ErrorCode::MockExhausted: return 502;
        default: return 500;
    }
}

Reply error_reply(const Error& e) {
    Reply r;
    r.status = status_for(e.code());
    r.body = {{"error", to_string(e.code())}, {"message", e.what()}};
    return r;
}

namespace {

std::int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

Reply ok(ordered_json body, int status = 200) { return {status, std::move(body)}; }

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    store_ = std::make_unique<student::StudentStore>(options_.data_dir, ingest::BktParams{}, 0.80);
}

std::string Service::new_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::ostringstream s;
    s << "s" << ++next_id_ << "-" << std::hex << (rng() & 0xffffffffULL);
    return s.str();
}

std::shared_ptr<Service::Slot> Service::find(const std::string& session_id) {
    std::lock_guard g(registry_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) fail(ErrorCode::NotFound, "no session '" + session_id + "'");
    return it->second;
}

ordered_json Service::descriptor(const Slot& slot) const {
    ordered_json j;
    j["session_id"] = slot.session_id;
    j["student_id"] = slot.student_id;
    j["created_at"] = slot.created_at_ms;
    j["video_label"] = slot.video_label;
    j["status"] = slot.status;
    if (!slot.failure.empty()) j["failure"] = slot.failure;
    if (slot.session) {
        j["phase"] = orchestrator::to_string(slot.session->phase());
        j["queue_remaining"] = slot.session->queue().size();
        j["history_size"] = slot.session->history().size();
        if (!slot.session->warnings().empty()) j["warnings"] = slot.session->warnings();
    }
    return j;
}

Reply Service::create_session(const json& body) {
    try {
        if (!body.is_object()) fail(ErrorCode::Validation, "request body must be a JSON object");
        if (!body.contains("student_id") || !body["student_id"].is_string())
            fail(ErrorCode::Validation, "'student_id' is required");
        const auto student_id = body["student_id"].get<std::string>();
        student::validate_student_id(student_id);

        ingest::ExpertConfig config;
        if (body.contains("config")) {
            config = ingest::parse_config(body["config"]);
            config.base_dir = options_.config_root;
        } else if (body.contains("config_path") && body["config_path"].is_string()) {
            std::filesystem::path p = body["config_path"].get<std::string>();
            if (p.is_relative()) p = options_.config_root / p;
            config = ingest::load_config(p);
        } else {
            fail(ErrorCode::Validation, "either 'config' or 'config_path' is required");
        }

        gateway::GatewayPtr gw;
        if (body.contains("mock_script")) {
            gw = std::make_shared<gateway::MockGateway>(gateway::parse_mock_script(body["mock_script"].dump()));
        } else {
            gw = gateway::make_gateway(config.gateway, options_.mock_script);
        }

        auto slot = std::make_shared<Slot>();
        slot->student_id = student_id;
        slot->video_label = config.topic;
        slot->created_at_ms = now_ms();
        slot->status = "preparing";
        {
            std::lock_guard g(registry_mutex_);
            slot->session_id = new_session_id();
            sessions_[slot->session_id] = slot;
        }

        std::lock_guard lock(slot->mutex);
        try {
            const ingest::SourceOptions sources{config.base_dir, options_.offline};
            auto result = run_pipeline(config, *gw, *store_, student_id, sources);
            orchestrator::SessionInputs in;
            in.session_id = slot->session_id;
            in.student_id = student_id;
            in.config = config;
            in.dsl = std::move(result.dsl);
            in.segments = std::move(result.segmentation.segments);
            in.code = std::move(result.code);
            in.gateway = gw;
            in.store = store_.get();
            in.seed = config.session_seed;
            slot->session = std::make_unique<orchestrator::Session>(std::move(in));
            slot->status = "active";
            auto j = descriptor(*slot);
            j["queue_size"] = slot->session->queue().size();
            j["skipped_mastered"] = result.skipped_mastered;
            return ok(std::move(j), 201);
        } catch (const PipelineError& e) {
            slot->status = "failed";
            slot->failure = e.what();
            auto j = descriptor(*slot);
            j["error"] = to_string(e.code());
            j["stage"] = e.stage();
            j["message"] = e.what();
            return ok(std::move(j), 422);
        }
    } catch (const Error& e) {
        return error_reply(e);
    } catch (const json::exception& e) {
        return error_reply(Error(ErrorCode::Validation, e.what()));
    }
}

Reply Service::next_message(const std::string& session_id, int wait_ms) {
    try {
        auto slot = find(session_id);
        wait_ms = std::clamp(wait_ms, 0, options_.max_wait_ms);
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(wait_ms);
        std::unique_lock lock(slot->mutex);
        if (!slot->session) fail(ErrorCode::Phase, "session is " + slot->status + ": " + slot->failure);
        for (;;) {
            auto r = slot->session->step();
            if (slot->session->phase() == orchestrator::Phase::Done) slot->status = "done";
            ordered_json j;
            j["phase"] = orchestrator::to_string(r.phase);
            if (r.kind == orchestrator::StepResult::Kind::Message) {
                j["status"] = "message";
                j["envelope"] = orchestrator::to_json(*r.envelope);
                return ok(std::move(j));
            }
            if (r.kind == orchestrator::StepResult::Kind::Done) {
                j["status"] = "done";
                return ok(std::move(j));
            }
            const auto seen = slot->events;
            if (wait_ms == 0 || !slot->changed.wait_until(lock, deadline, [&] { return slot->events != seen; })) {
                j["status"] = "blocked";
                return ok(std::move(j));
            }
        }
    } catch (const Error& e) {
        return error_reply(e);
    }
}

Reply Service::post_event(const std::string& session_id, const json& body) {
    try {
        auto slot = find(session_id);
        const auto event = orchestrator::parse_event(body);
        std::lock_guard lock(slot->mutex);
        if (!slot->session) fail(ErrorCode::Phase, "session is " + slot->status + ": " + slot->failure);
        if (!event.id.empty()) {
            if (const auto it = slot->acked.find(event.id); it != slot->acked.end()) {
                auto j = it->second;
                j["duplicate"] = true;
                return ok(std::move(j));
            }
        }
        // The store persists each observation before handle_event returns,
        // so the ack below never runs ahead of the disk.
        const auto result = slot->session->handle_event(event);
        ordered_json j;
        j["ack"] = true;
        if (!event.id.empty()) j["event_id"] = event.id;
        j["replies"] = ordered_json::array();
        for (const auto& e : result.replies) j["replies"].push_back(orchestrator::to_json(e));
        if (result.observation)
            j["observation"] = {{"correct", result.observation->correct}, {"anchor", result.observation->anchor_text}};
        j["advanced"] = result.advanced;
        j["phase"] = orchestrator::to_string(slot->session->phase());
        if (!event.id.empty()) slot->acked[event.id] = j;
        ++slot->events;
        slot->changed.notify_all();
        return ok(std::move(j));
    } catch (const Error& e) {
        return error_reply(e);
    }
}

Reply Service::student_model(const std::string& student_id) {
    try {
        student::validate_student_id(student_id);
        return ok(student::to_json(store_->snapshot(student_id)));
    } catch (const Error& e) {
        return error_reply(e);
    }
}

Reply Service::session_dsl(const std::string& session_id) {
    try {
        auto slot = find(session_id);
        std::lock_guard lock(slot->mutex);
        if (!slot->session) fail(ErrorCode::Phase, "session is " + slot->status);
        return ok(dsl::to_json(slot->session->dsl()));
    } catch (const Error& e) {
        return error_reply(e);
    }
}

Reply Service::session_info(const std::string& session_id) {
    try {
        auto slot = find(session_id);
        std::lock_guard lock(slot->mutex);
        return ok(descriptor(*slot));
    } catch (const Error& e) {
        return error_reply(e);
    }
}

Reply Service::health() const { return ok({{"status", "ok"}}); }

Reply Service::dispatch(const std::string& method, const std::string& path, const std::string& body_text) {
    std::string route = path;
    int wait_ms = 0;
    if (const auto q = route.find('?'); q != std::string::npos) {
        std::istringstream query(route.substr(q + 1));
        route.resize(q);
        std::string kv;
        while (std::getline(query, kv, '&')) {
            if (kv.starts_with("wait_ms=")) {
                try {
                    wait_ms = std::stoi(kv.substr(8));
                } catch (const std::exception&) {
                    return error_reply(Error(ErrorCode::InvalidArgument, "wait_ms must be an integer"));
                }
            }
        }
    }
    std::vector<std::string> parts;
    {
        std::istringstream in(route);
        std::string p;
        while (std::getline(in, p, '/'))
            if (!p.empty()) parts.push_back(p);
    }
    auto body = [&]() -> json {
        if (text::trim(body_text).empty()) return json::object();
        auto j = json::parse(body_text, nullptr, false);
        if (j.is_discarded()) fail(ErrorCode::Validation, "request body is not valid JSON");
        return j;
    };
    try {
        if (method == "GET" && parts == std::vector<std::string>{"health"}) return health();
        if (method == "POST" && parts == std::vector<std::string>{"sessions"}) return create_session(body());
        if (parts.size() == 2 && parts[0] == "sessions" && method == "GET") return session_info(parts[1]);
        if (parts.size() == 3 && parts[0] == "sessions") {
            if (method == "GET" && parts[2] == "next") return next_message(parts[1], wait_ms);
            if (method == "POST" && parts[2] == "events") return post_event(parts[1], body());
            if (method == "GET" && parts[2] == "dsl") return session_dsl(parts[1]);
        }
        if (parts.size() == 3 && parts[0] == "students" && parts[2] == "model" && method == "GET")
            return student_model(parts[1]);
        return error_reply(Error(ErrorCode::NotFound, "no route " + method + " " + route));
    } catch (const Error& e) {
        return error_reply(e);
    }
}

}  // namespace apprentice::service
