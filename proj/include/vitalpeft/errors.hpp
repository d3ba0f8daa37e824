// Copyright 2026 The vitalpeft Authors.
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
#include <string_view>

namespace vitalpeft {

/// Broad failure classes. The CLI prints the class name so failures stay greppable.
enum class ErrorKind {
    Dimension,
    Index,
    Contract,
    Data,
    Format,
    Config,
    Fit,
    Split,
    Numeric,
    Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension_error";
        case ErrorKind::Index: return "index_error";
        case ErrorKind::Contract: return "contract_error";
        case ErrorKind::Data: return "data_error";
        case ErrorKind::Format: return "format_error";
        case ErrorKind::Config: return "config_error";
        case ErrorKind::Fit: return "fit_error";
        case ErrorKind::Split: return "split_error";
        case ErrorKind::Numeric: return "numeric_error";
        case ErrorKind::Io: return "io_error";
    }
    return "error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

template <ErrorKind K>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& message) : Error(K, message) {}
};

using DimensionError = TypedError<ErrorKind::Dimension>;
using IndexError = TypedError<ErrorKind::Index>;
using ContractError = TypedError<ErrorKind::Contract>;
using DataError = TypedError<ErrorKind::Data>;
using FormatError = TypedError<ErrorKind::Format>;
using ConfigError = TypedError<ErrorKind::Config>;
using FitError = TypedError<ErrorKind::Fit>;
using SplitError = TypedError<ErrorKind::Split>;
using NumericError = TypedError<ErrorKind::Numeric>;
using IoError = TypedError<ErrorKind::Io>;

}  // namespace vitalpeft
