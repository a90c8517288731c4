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
#include "gateway/gateway.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/text.hpp"

namespace apprentice::gateway {

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorCode::InvalidArgument, "embedding dimensions differ");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::size_t count_tokens(std::string_view text) { return text::split_whitespace(text).size(); }

std::size_t count_history_tokens(std::span<const ChatTurn> history) {
    std::size_t n = 0;
    for (const auto& turn : history) n += count_tokens(turn.text);
    return n;
}

std::vector<ChatTurn> trim_history(std::span<const ChatTurn> history, std::size_t budget) {
    std::vector<ChatTurn> kept(history.begin(), history.end());
    std::size_t total = count_history_tokens(kept);
    auto it = kept.begin();
    while (total > budget && it != kept.end()) {
        if (it->role == "system") {
            ++it;
            continue;
        }
        total -= count_tokens(it->text);
        it = kept.erase(it);
    }
    return kept;
}

}  // namespace apprentice::gateway
