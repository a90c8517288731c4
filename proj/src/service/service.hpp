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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "orchestrator/orchestrator.hpp"
#include "service/pipeline.hpp"
#include "student/student_model.hpp"

namespace apprentice::service {

struct ServiceOptions {
    std::filesystem::path data_dir = "data";
    // Mock script handed to every new session; empty means the config decides.
    std::string mock_script;
    // Relative transcript/code paths in uploaded configs resolve here.
    std::filesystem::path config_root = ".";
    bool offline = false;
    std::string token;  // bearer token; empty disables the check
    int max_wait_ms = 30000;
};

struct Reply {
    int status = 200;
    nlohmann::ordered_json body;
};

// HTTP-ish status for an engine error.
int status_for(ErrorCode code) noexcept;
Reply error_reply(const Error& e);

/// Session registry plus the shared student store. Each session has its own
/// lock, so events for one session are applied in arrival order while other
/// sessions proceed.
class Service {
public:
    explicit Service(ServiceOptions options);

    // Body: {"student_id", "config": {...} | "config_path", "mock_script"?: [...]}.
    Reply create_session(const nlohmann::json& body);
    // Long-polls up to wait_ms while the session is blocked.
    Reply next_message(const std::string& session_id, int wait_ms = 0);
    Reply post_event(const std::string& session_id, const nlohmann::json& body);
    Reply student_model(const std::string& student_id);
    Reply session_dsl(const std::string& session_id);
    Reply session_info(const std::string& session_id);
    Reply health() const;

    // Route table shared by the HTTP server and the in-process C entry point.
    // Query strings on `path` are honoured for wait_ms.
    Reply dispatch(const std::string& method, const std::string& path, const std::string& body_text);

    const ServiceOptions& options() const noexcept { return options_; }
    student::StudentStore& store() noexcept { return *store_; }

private:
    struct Slot {
        std::mutex mutex;
        std::condition_variable changed;
        std::unique_ptr<orchestrator::Session> session;
        std::string session_id;
        std::string student_id;
        std::string video_label;
        std::string status;  // preparing | active | done | failed
        std::string failure;
        std::int64_t created_at_ms = 0;
        std::map<std::string, nlohmann::ordered_json> acked;  // event id -> reply body
        std::uint64_t events = 0;
    };

    std::shared_ptr<Slot> find(const std::string& session_id);
    nlohmann::ordered_json descriptor(const Slot& slot) const;
    std::string new_session_id();

    ServiceOptions options_;
    std::unique_ptr<student::StudentStore> store_;
    std::mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::uint64_t next_id_ = 0;
};

}  // namespace apprentice::service
