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
#include "core/canonical_json.hpp"

#include <algorithm>

namespace apprentice {

namespace {

using nlohmann::ordered_json;

bool is_scalar(const ordered_json& v) { return !v.is_object() && !v.is_array(); }

void write(const ordered_json& v, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    if (v.is_object()) {
        if (v.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad;
            out += ordered_json(it.key()).dump();
            out += ": ";
            write(it.value(), indent, depth + 1, out);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    if (v.is_array()) {
        if (v.empty()) {
            out += "[]";
            return;
        }
        if (std::all_of(v.begin(), v.end(), is_scalar)) {
            out += "[";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i > 0) out += ", ";
                out += v[i].dump();
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i > 0) out += ",\n";
            out += pad;
            write(v[i], indent, depth + 1, out);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    out += v.dump();
}

}  // namespace

std::string canonical_dump(const nlohmann::ordered_json& value, int indent) {
    std::string out;
    write(value, indent, 0, out);
    return out;
}

}  // namespace apprentice
