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
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "core/text.hpp"
#include "gateway/mock_gateway.hpp"
#include "ingestion/config.hpp"
#include "student/student_model.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixture(std::string_view rel) { return fs::path(APPRENTICE_FIXTURES) / rel; }

inline std::string read(std::string_view rel) { return apprentice::fsutil::read_file(fixture(rel)); }

inline std::shared_ptr<apprentice::gateway::MockGateway> mock(std::string_view rel) {
    return std::make_shared<apprentice::gateway::MockGateway>(apprentice::gateway::load_mock_script(fixture(rel)));
}

// Independent restatement of the tracing step, kept deliberately naive.
inline double oracle_step(double p, double t, double s, double g, bool c) {
    const double post = c ? p * (1 - s) / (p * (1 - s) + (1 - p) * g) : p * s / (p * s + (1 - p) * (1 - g));
    return post + (1 - post) * t;
}

struct TempDir {
    fs::path path;
    explicit TempDir(std::string_view tag = "apprentice") {
        std::random_device rd;
        path = fs::temp_directory_path() / (std::string(tag) + "-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testsupport
