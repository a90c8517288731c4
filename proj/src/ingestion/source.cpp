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
#include <string>

#include <httplib.h>

#include "core/error.hpp"
#include "core/text.hpp"
#include "ingestion/transcript.hpp"

namespace apprentice::ingest {

namespace {

bool is_remote(std::string_view source) {
    return source.starts_with("http://") || source.starts_with("https://");
}

std::string fetch_remote(std::string_view url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin(url.substr(0, path_start));
    const std::string path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    auto res = client.Get(path);
    if (!res) fail(ErrorCode::Io, "unreachable source '" + std::string(url) + "': " + httplib::to_string(res.error()));
    if (res->status != 200)
        fail(ErrorCode::Io, "source '" + std::string(url) + "' returned HTTP " + std::to_string(res->status));
    return res->body;
}

}  // namespace

std::string fetch_source(std::string_view source, const SourceOptions& options) {
    if (source.empty()) fail(ErrorCode::Io, "empty source");
    if (is_remote(source)) {
        if (options.offline)
            fail(ErrorCode::Io, "remote source '" + std::string(source) + "' refused in offline mode");
        return fetch_remote(source);
    }
    if (source.starts_with("file://")) source.remove_prefix(7);
    std::filesystem::path path{std::string(source)};
    if (path.is_relative() && !options.base_dir.empty()) path = options.base_dir / path;
    if (!std::filesystem::exists(path)) fail(ErrorCode::Io, "unreachable source '" + path.string() + "'");
    return fsutil::read_file(path);
}

}  // namespace apprentice::ingest
