/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/errors.hpp
 *
 * Copyright 2026 The uvmt contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
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

namespace uvmt {

/// Base class for all uvmt errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated precondition or shape contract. The message names the offending
/// argument or axis.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Unregularized least-squares system without full column rank.
class SingularSystemError : public Error {
public:
    explicit SingularSystemError(const std::string& msg) : Error(msg) {}
};

/// UV texture extraction could not proceed (e.g. face outside the image).
class ExtractionError : public Error {
public:
    explicit ExtractionError(const std::string& msg) : Error(msg) {}
};

/// File I/O or malformed container data.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/// Rejected configuration input; names the offending key.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Training aborted (non-finite loss). Carries the path of the batch dump.
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, std::string dump_path)
        : Error(msg), dump_path_(std::move(dump_path)) {}
    const std::string& dump_path() const { return dump_path_; }

private:
    std::string dump_path_;
};

namespace detail {
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}
} // namespace detail

} // namespace uvmt
