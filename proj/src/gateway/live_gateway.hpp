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
#include <mutex>
#include <string>

#include "gateway/gateway.hpp"
#include "ingestion/config.hpp"

namespace apprentice::gateway {

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_delay{500};  // doubled after each failure
};

/// OpenAI-compatible chat-completions / embeddings client. Requests are
/// serialized through one rate limiter per instance.
class LiveGateway final : public Gateway {
public:
    explicit LiveGateway(ingest::GatewaySettings settings, RetryPolicy retry = {},
                         std::chrono::milliseconds min_interval = std::chrono::milliseconds{0});

    std::string generate(const GenerationRequest& request) override;
    std::string generate_stream(const GenerationRequest& request, const TokenSink& on_token) override;
    Embedding embed(std::string_view text) override;

    std::string model_for(std::string_view stage) const;

private:
    std::string api_key() const;
    void pace();

    ingest::GatewaySettings settings_;
    RetryPolicy retry_;
    std::chrono::milliseconds min_interval_;
    std::mutex rate_mutex_;
    std::chrono::steady_clock::time_point last_request_{};
};

GatewayPtr make_gateway(const ingest::GatewaySettings& settings, const std::string& mock_script_path);

}  // namespace apprentice::gateway
