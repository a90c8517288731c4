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
#include "core/text.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace apprentice::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }
bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '.'; }
bool is_ident(char c) { return is_word(c) || c == '.'; }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const auto start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    for (const auto& tok : split_whitespace(s)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    if (from.empty()) return s;
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

bool contains(std::string_view haystack, std::string_view needle) noexcept {
    return haystack.find(needle) != std::string_view::npos;
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_word(s[i])) ++i;
        const auto start = i;
        while (i < s.size() && is_word(s[i])) ++i;
        if (i > start) out.push_back(to_lower(s.substr(start, i - start)));
    }
    return out;
}

std::vector<std::string> identifiers(std::string_view code) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < code.size()) {
        const char c = code[i];
        if (c == '#') {
            const auto eol = code.find('\n', i);
            i = eol == std::string_view::npos ? code.size() : eol + 1;
            continue;
        }
        if (c == '"' || c == '\'') {
            // skip string literals
            const auto close = code.find(c, i + 1);
            i = close == std::string_view::npos ? code.size() : close + 1;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            while (i < code.size() && is_ident(code[i])) ++i;
            continue;
        }
        if (is_ident_start(c)) {
            const auto start = i;
            while (i < code.size() && is_ident(code[i])) ++i;
            auto tok = code.substr(start, i - start);
            if (tok.find_first_not_of('.') != std::string_view::npos) out.emplace_back(tok);
            continue;
        }
        ++i;
    }
    return out;
}

std::vector<std::string> quoted_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char q = s[i];
        if (q != '`' && q != '\'') {
            ++i;
            continue;
        }
        // An apostrophe inside a word ("field's") is not a quote.
        if (q == '\'' && i > 0 && is_word(s[i - 1])) {
            ++i;
            continue;
        }
        const auto close = s.find(q, i + 1);
        if (close == std::string_view::npos) break;
        const auto inner = s.substr(i + 1, close - i - 1);
        if (!inner.empty() && inner.size() < 64 &&
            std::none_of(inner.begin(), inner.end(), [](char c) { return c == ' '; })) {
            out.emplace_back(inner);
            i = close + 1;
        } else {
            ++i;
        }
    }
    return out;
}

std::vector<std::string> placeholders(std::string_view prompt) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while ((i = prompt.find('{', i)) != std::string_view::npos) {
        const auto close = prompt.find('}', i + 1);
        if (close == std::string_view::npos) break;
        const auto name = prompt.substr(i + 1, close - i - 1);
        const bool valid = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
        });
        if (valid && std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
        i = valid ? close + 1 : i + 1;
    }
    return out;
}

}  // namespace apprentice::text

namespace apprentice::fsutil {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "': " + std::strerror(errno));
    std::size_t written = 0;
    while (written < content.size()) {
        const auto n = ::write(fd, content.data() + written, content.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            fail(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        fail(ErrorCode::Io, "rename failed for '" + path.string() + "'");
    if (path.has_parent_path()) {
        const int dfd = ::open(path.parent_path().c_str(), O_RDONLY | O_DIRECTORY);
        if (dfd >= 0) {
            ::fsync(dfd);
            ::close(dfd);
        }
    }
}

}  // namespace apprentice::fsutil
