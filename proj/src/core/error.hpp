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

#include <stdexcept>
#include <string>
#include <string_view>

namespace apprentice {

enum class ErrorCode {
    InvalidArgument,
    Validation,
    Io,
    Parse,
    Gateway,
    MockExhausted,
    Coverage,
    UnresolvedAnchor,
    UnresolvedParameter,
    NumericDegenerate,
    Phase,
    NotFound,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the engine carries a code so the C boundary can
/// map it without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Gateway reply that could not be parsed; keeps the raw text for diagnosis.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::string raw)
        : Error(ErrorCode::Parse, message), raw_(std::move(raw)) {}

    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace apprentice
