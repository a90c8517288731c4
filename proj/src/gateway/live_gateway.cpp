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
#include "gateway/live_gateway.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "core/error.hpp"
#include "gateway/mock_gateway.hpp"

namespace apprentice::gateway {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, no trailing slash
};

Endpoint split_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) fail(ErrorCode::InvalidArgument, "gateway base_url needs a scheme");
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint e;
    e.origin = base_url.substr(0, path_start);
    if (path_start != std::string::npos) e.prefix = base_url.substr(path_start);
    while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
    return e;
}

bool retryable(int status) { return status == 429 || status >= 500; }

json messages_of(const GenerationRequest& r) {
    json messages = json::array();
    if (!r.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", r.system_prompt}});
    for (const auto& turn : r.history) messages.push_back({{"role", turn.role}, {"content", turn.text}});
    messages.push_back({{"role", "user"}, {"content", r.user_prompt}});
    return messages;
}

}  // namespace

LiveGateway::LiveGateway(ingest::GatewaySettings settings, RetryPolicy retry, std::chrono::milliseconds min_interval)
    : settings_(std::move(settings)), retry_(retry), min_interval_(min_interval) {}

std::string LiveGateway::model_for(std::string_view stage) const {
    const auto dot = stage.find('.');
    const std::string head(stage.substr(0, dot));
    if (auto it = settings_.stage_models.find(std::string(stage)); it != settings_.stage_models.end())
        return it->second;
    if (auto it = settings_.stage_models.find(head); it != settings_.stage_models.end()) return it->second;
    return settings_.model;
}

std::string LiveGateway::api_key() const {
    const char* key = std::getenv(settings_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        fail(ErrorCode::Gateway, "environment variable " + settings_.api_key_env + " is not set");
    return key;
}

void LiveGateway::pace() {
    std::lock_guard lock(rate_mutex_);
    const auto now = std::chrono::steady_clock::now();
    const auto next = last_request_ + min_interval_;
    if (now < next) std::this_thread::sleep_for(next - now);
    last_request_ = std::chrono::steady_clock::now();
}

namespace {

template <typename Attempt>
std::string with_retries(const RetryPolicy& policy, const std::string& what, Attempt&& attempt) {
    std::string last_error;
    auto delay = policy.base_delay;
    for (int i = 0; i < policy.attempts; ++i) {
        int status = 0;
        std::string body;
        const bool transport_ok = attempt(status, body, last_error);
        if (transport_ok && status == 200) return body;
        if (transport_ok) {
            last_error = "HTTP " + std::to_string(status) + ": " + body.substr(0, 200);
            if (!retryable(status)) break;
        }
        if (i + 1 < policy.attempts) {
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
    fail(ErrorCode::Gateway, what + " failed: " + last_error);
}

}  // namespace

std::string LiveGateway::generate(const GenerationRequest& request) {
    const auto endpoint = split_url(settings_.base_url);
    const json body = {{"model", model_for(request.stage)},
                       {"messages", messages_of(request)},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_tokens}};
    const httplib::Headers headers = {{"Authorization", "Bearer " + api_key()}};
    const auto payload = body.dump();

    auto raw = with_retries(retry_, "generation", [&](int& status, std::string& out, std::string& err) {
        pace();
        httplib::Client client(endpoint.origin);
        client.set_read_timeout(120);
        auto res = client.Post(endpoint.prefix + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            err = httplib::to_string(res.error());
            return false;
        }
        status = res->status;
        out = res->body;
        return true;
    });
    try {
        const auto reply = json::parse(raw);
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("unexpected completion payload: ") + e.what(), raw);
    }
}

std::string LiveGateway::generate_stream(const GenerationRequest& request, const TokenSink& on_token) {
    const auto endpoint = split_url(settings_.base_url);
    const json body = {{"model", model_for(request.stage)},
                       {"messages", messages_of(request)},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_tokens},
                       {"stream", true}};
    const auto key = api_key();
    std::string full;

    with_retries(retry_, "streaming generation", [&](int& status, std::string& out, std::string& err) {
        pace();
        full.clear();
        std::string pending;
        httplib::Client client(endpoint.origin);
        client.set_read_timeout(120);
        httplib::Request req;
        req.method = "POST";
        req.path = endpoint.prefix + "/chat/completions";
        req.headers = {{"Authorization", "Bearer " + key}, {"Content-Type", "application/json"}};
        req.body = body.dump();
        req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
            pending.append(data, len);
            std::size_t nl;
            while ((nl = pending.find('\n')) != std::string::npos) {
                std::string line = pending.substr(0, nl);
                pending.erase(0, nl + 1);
                if (!line.starts_with("data:")) continue;
                auto data_part = line.substr(5);
                if (!data_part.empty() && data_part.front() == ' ') data_part.erase(0, 1);
                if (data_part.starts_with("[DONE]")) continue;
                try {
                    const auto chunk = json::parse(data_part);
                    const auto& delta = chunk.at("choices").at(0).at("delta");
                    if (delta.contains("content") && delta["content"].is_string()) {
                        const auto piece = delta["content"].get<std::string>();
                        full += piece;
                        on_token(piece);
                    }
                } catch (const json::exception&) {
                    // keep-alive or partial frame
                }
            }
            return true;
        };
        auto res = client.send(req);
        if (!res) {
            err = httplib::to_string(res.error());
            return false;
        }
        status = res->status;
        out = full;
        return true;
    });
    return full;
}

Embedding LiveGateway::embed(std::string_view text) {
    if (text.empty()) fail(ErrorCode::InvalidArgument, "cannot embed empty text");
    const auto endpoint = split_url(settings_.base_url);
    const json body = {{"model", settings_.embedding_model}, {"input", std::string(text)}};
    const httplib::Headers headers = {{"Authorization", "Bearer " + api_key()}};
    const auto payload = body.dump();
    auto raw = with_retries(retry_, "embedding", [&](int& status, std::string& out, std::string& err) {
        pace();
        httplib::Client client(endpoint.origin);
        auto res = client.Post(endpoint.prefix + "/embeddings", headers, payload, "application/json");
        if (!res) {
            err = httplib::to_string(res.error());
            return false;
        }
        status = res->status;
        out = res->body;
        return true;
    });
    try {
        return json::parse(raw).at("data").at(0).at("embedding").get<Embedding>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("unexpected embedding payload: ") + e.what(), raw);
    }
}

GatewayPtr make_gateway(const ingest::GatewaySettings& settings, const std::string& mock_script_path) {
    if (!mock_script_path.empty()) return std::make_shared<MockGateway>(load_mock_script(mock_script_path));
    if (settings.backend == ingest::GatewayBackend::Mock) return std::make_shared<MockGateway>();
    return std::make_shared<LiveGateway>(settings);
}

}  // namespace apprentice::gateway
