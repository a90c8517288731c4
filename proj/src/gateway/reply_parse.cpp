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
#include "gateway/reply_parse.hpp"

#include <cctype>
#include <string>

#include "core/error.hpp"

namespace apprentice::gateway {

using nlohmann::json;

namespace {

class LiteralParser {
public:
    LiteralParser(std::string_view src, std::size_t pos) : src_(src), pos_(pos) {}

    json value() {
        skip_ws();
        if (pos_ >= src_.size()) error("unexpected end of reply");
        const char c = src_[pos_];
        if (c == '[') return sequence('[', ']');
        if (c == '(') return sequence('(', ')');
        if (c == '{') return mapping();
        if (c == '"' || c == '\'') return string();
        return bare();
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        throw ParseError("reply is not a list literal (" + what + " at offset " + std::to_string(pos_) + ")",
                         std::string(src_));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])) != 0) ++pos_;
    }

    bool closes_string(std::size_t quote_pos) const {
        std::size_t i = quote_pos + 1;
        while (i < src_.size() && (src_[i] == ' ' || src_[i] == '\t' || src_[i] == '\r' || src_[i] == '\n')) ++i;
        if (i >= src_.size()) return true;
        const char n = src_[i];
        return n == ',' || n == ']' || n == ')' || n == '}' || n == ':';
    }

    json sequence(char open, char close) {
        (void)open;
        ++pos_;
        json arr = json::array();
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) error("unterminated list");
            if (src_[pos_] == close) {
                ++pos_;
                return arr;
            }
            if (src_[pos_] == '.' && src_.substr(pos_, 3) == "...") {
                pos_ += 3;  // "..." placeholder some models echo back
                skip_ws();
                if (pos_ < src_.size() && src_[pos_] == ',') ++pos_;
                continue;
            }
            arr.push_back(value());
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == ',') {
                ++pos_;
                continue;
            }
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != close) error("expected ',' or closing bracket");
        }
    }

    json mapping() {
        ++pos_;
        json obj = json::object();
        for (;;) {
            skip_ws();
            if (pos_ >= src_.size()) error("unterminated object");
            if (src_[pos_] == '}') {
                ++pos_;
                return obj;
            }
            auto key = value();
            if (!key.is_string()) error("object key must be a string");
            skip_ws();
            if (pos_ >= src_.size() || src_[pos_] != ':') error("expected ':'");
            ++pos_;
            obj[key.get<std::string>()] = value();
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == ',') ++pos_;
        }
    }

    json string() {
        const char quote = src_[pos_++];
        std::string out;
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '\\' && pos_ + 1 < src_.size()) {
                const char e = src_[pos_ + 1];
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'u':
                        // keep non-ASCII escapes verbatim rather than decoding UTF-16
                        out += "\\u";
                        break;
                    default: out.push_back(e); break;
                }
                pos_ += 2;
                continue;
            }
            if (c == quote && closes_string(pos_)) {
                ++pos_;
                return out;
            }
            out.push_back(c);
            ++pos_;
        }
        error("unterminated string");
    }

    json bare() {
        const auto start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) != 0 ||
                                      src_[pos_] == '.' || src_[pos_] == '-' || src_[pos_] == '+' ||
                                      src_[pos_] == '_'))
            ++pos_;
        const std::string tok(src_.substr(start, pos_ - start));
        if (tok.empty()) error("unexpected character");
        if (tok == "True" || tok == "true") return true;
        if (tok == "False" || tok == "false") return false;
        if (tok == "None" || tok == "null") return nullptr;
        try {
            std::size_t used = 0;
            const double d = std::stod(tok, &used);
            if (used == tok.size()) return d;
        } catch (const std::exception&) {
        }
        error("unexpected token '" + tok + "'");
    }

    std::string_view src_;
    std::size_t pos_;
};

}  // namespace

json parse_list_reply(std::string_view reply) {
    const auto open = reply.find('[');
    if (open == std::string_view::npos) throw ParseError("reply contains no list", std::string(reply));
    // Well-formed JSON first; the literal parser handles the rest.
    const auto close = reply.rfind(']');
    if (close != std::string_view::npos && close > open) {
        auto parsed = json::parse(reply.substr(open, close - open + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_array()) return parsed;
    }
    LiteralParser parser(reply, open);
    return parser.value();
}

}  // namespace apprentice::gateway
