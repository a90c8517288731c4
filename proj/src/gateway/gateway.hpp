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

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apprentice::gateway {

struct ChatTurn {
    std::string role;  // "system", "assistant" or "user"
    std::string text;

    bool operator==(const ChatTurn&) const = default;
};

struct GenerationRequest {
    // Pipeline stage tag ("segmentation.summarize", "conversation", ...); picks
    // the model on live backends and is visible to mock matchers.
    std::string stage;
    std::string system_prompt;
    std::vector<ChatTurn> history;
    std::string user_prompt;
    double temperature = 0.2;
    int max_tokens = 1024;
};

using Embedding = std::vector<double>;
using TokenSink = std::function<void(std::string_view)>;

/// Single boundary for text generation and embeddings. Implementations are
/// shareable across sessions and must be thread-safe.
class Gateway {
public:
    virtual ~Gateway() = default;

    virtual std::string generate(const GenerationRequest& request) = 0;

    // Delivers the reply incrementally when the backend supports it; returns
    // the full text either way.
    virtual std::string generate_stream(const GenerationRequest& request, const TokenSink& on_token) {
        auto text = generate(request);
        on_token(text);
        return text;
    }

    virtual Embedding embed(std::string_view text) = 0;
};

using GatewayPtr = std::shared_ptr<Gateway>;

double cosine(std::span<const double> a, std::span<const double> b);

// Whitespace-token approximation of the prompt size.
std::size_t count_tokens(std::string_view text);
std::size_t count_history_tokens(std::span<const ChatTurn> history);

// Drops the oldest non-system turns until the history fits the budget.
// System turns are always kept, even when they alone exceed it.
std::vector<ChatTurn> trim_history(std::span<const ChatTurn> history, std::size_t budget);

}  // namespace apprentice::gateway
