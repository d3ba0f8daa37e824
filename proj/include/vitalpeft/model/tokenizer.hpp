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

#include <cstddef>
#include <span>
#include <vector>

#include "vitalpeft/model/config.hpp"

namespace vitalpeft::model {

struct TokenizedSeries {
    std::vector<std::size_t> ids;
    double scale = 1.0;
};

/// Mean-absolute scaling followed by uniform binning of clamp(v / scale, low, high).
/// A zero mean-absolute value falls back to scale 1.0. Non-finite input is a DataError.
TokenizedSeries tokenize(std::span<const double> context, const TokenizerConfig& cfg);

/// Bins `values` with an externally supplied scale (horizon targets reuse the context scale).
std::vector<std::size_t> encode_with_scale(std::span<const double> values, double scale,
                                           const TokenizerConfig& cfg);

std::size_t value_to_bin(double scaled, const TokenizerConfig& cfg);
/// Bin centre; special tokens are not values and raise a ContractError.
double bin_center(std::size_t id, const TokenizerConfig& cfg);

std::vector<double> detokenize(std::span<const std::size_t> ids, double scale, const TokenizerConfig& cfg);

}  // namespace vitalpeft::model
