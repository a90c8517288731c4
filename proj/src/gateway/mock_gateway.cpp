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
#include "gateway/mock_gateway.hpp"

#include <cmath>

#include <json.hpp>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::gateway {

using nlohmann::json;

MockScript parse_mock_script(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::Validation, std::string("mock script is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) fail(ErrorCode::Validation, "mock script must be a JSON array");
    MockScript script;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        if (!e.is_object() || !e.contains("reply"))
            fail(ErrorCode::Validation, "mock script entry " + std::to_string(i) + " needs a 'reply'");
        MockEntry entry;
        if (e.contains("match")) {
            if (!e["match"].is_string())
                fail(ErrorCode::Validation, "mock script entry " + std::to_string(i) + ": 'match' must be a string");
            entry.match = e["match"].get<std::string>();
        }
        entry.reply = e["reply"].is_string() ? e["reply"].get<std::string>() : e["reply"].dump();
        script.push_back(std::move(entry));
    }
    return script;
}

MockScript load_mock_script(const std::filesystem::path& path) {
    return parse_mock_script(fsutil::read_file(path));
}

MockGateway::MockGateway(MockScript script) : script_(std::move(script)), consumed_(script_.size(), false) {}

std::string MockGateway::generate(const GenerationRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    const std::string haystack = request.stage + "\n" + request.system_prompt + "\n" + request.user_prompt;
    for (std::size_t i = 0; i < script_.size(); ++i) {
        if (consumed_[i]) continue;
        const auto& m = script_[i].match;
        if (m.empty() || m == "*" || text::contains(haystack, m)) {
            consumed_[i] = true;
            return script_[i].reply;
        }
    }
    const auto prefix = request.user_prompt.substr(0, 80);
    fail(ErrorCode::MockExhausted, "mock script exhausted; no entry matches prompt starting '" + prefix + "'");
}

std::string MockGateway::generate_stream(const GenerationRequest& request, const TokenSink& on_token) {
    auto text = generate(request);
    const auto words = text::split_whitespace(text);
    for (std::size_t i = 0; i < words.size(); ++i) on_token(i == 0 ? words[i] : " " + words[i]);
    return text;
}

Embedding hashed_embedding(std::string_view text, std::size_t dimensions) {
    Embedding v(dimensions, 0.0);
    auto tokens = text::word_tokens(text);
    if (tokens.empty()) tokens.emplace_back(text);
    for (const auto& tok : tokens) {
        const auto h = text::fnv1a(tok);
        const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        v[h % dimensions] += sign;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
        for (double& x : v) x /= norm;
    return v;
}

Embedding MockGateway::embed(std::string_view text) {
    if (text::trim(text).empty()) fail(ErrorCode::InvalidArgument, "cannot embed empty text");
    std::lock_guard lock(mutex_);
    ++embed_calls_;
    if (embed_failures_ > 0) {
        --embed_failures_;
        fail(ErrorCode::Gateway, "embedding backend unavailable (injected)");
    }
    return hashed_embedding(text);
}

void MockGateway::fail_next_embeddings(std::size_t n) {
    std::lock_guard lock(mutex_);
    embed_failures_ = n;
}

std::size_t MockGateway::remaining() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (bool c : consumed_) n += c ? 0 : 1;
    return n;
}

std::size_t MockGateway::generate_calls() const {
    std::lock_guard lock(mutex_);
    return requests_.size();
}

std::size_t MockGateway::embed_calls() const {
    std::lock_guard lock(mutex_);
    return embed_calls_;
}

std::vector<GenerationRequest> MockGateway::requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
}

}  // namespace apprentice::gateway
