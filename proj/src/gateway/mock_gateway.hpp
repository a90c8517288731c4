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

#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "gateway/gateway.hpp"

namespace apprentice::gateway {

struct MockEntry {
    std::string match;  // substring of the request; empty or "*" matches anything
    std::string reply;

    bool operator==(const MockEntry&) const = default;
};

using MockScript = std::vector<MockEntry>;

// JSON array of {match, reply}; a non-string reply is stored as its compact JSON.
MockScript parse_mock_script(std::string_view json_text);
MockScript load_mock_script(const std::filesystem::path& path);

/// Deterministic scripted backend. Each generate() consumes the first
/// unconsumed entry whose matcher hits the request. Embeddings are signed
/// feature-hashed bags of words, so identical texts embed identically and
/// texts sharing words score a high cosine.
class MockGateway final : public Gateway {
public:
    static constexpr std::size_t kDimensions = 512;

    explicit MockGateway(MockScript script = {});

    std::string generate(const GenerationRequest& request) override;
    std::string generate_stream(const GenerationRequest& request, const TokenSink& on_token) override;
    Embedding embed(std::string_view text) override;

    // The next n embed() calls fail with a gateway error.
    void fail_next_embeddings(std::size_t n);

    std::size_t remaining() const;
    std::size_t generate_calls() const;
    std::size_t embed_calls() const;
    std::vector<GenerationRequest> requests() const;

private:
    mutable std::mutex mutex_;
    MockScript script_;
    std::vector<bool> consumed_;
    std::vector<GenerationRequest> requests_;
    std::size_t embed_calls_ = 0;
    std::size_t embed_failures_ = 0;
};

Embedding hashed_embedding(std::string_view text, std::size_t dimensions = MockGateway::kDimensions);

}  // namespace apprentice::gateway
