// Copyright 2026 The ontoseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace ontoseg {

enum class ErrorCode {
    io = 1,
    parse = 2,
    validation = 3,
    invalid_argument = 4,
    internal = 5,
};

/// The single exception type thrown by the core. Everything that can fail
/// carries a code (stable across the C boundary) and a human-readable
/// message with file/line context where available.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline Error parse_error(const std::string& msg) { return Error(ErrorCode::parse, msg); }
inline Error io_error(const std::string& msg) { return Error(ErrorCode::io, msg); }
inline Error validation_error(const std::string& msg) { return Error(ErrorCode::validation, msg); }
inline Error argument_error(const std::string& msg) { return Error(ErrorCode::invalid_argument, msg); }
inline Error internal_error(const std::string& msg) { return Error(ErrorCode::internal, msg); }

}  // namespace ontoseg
