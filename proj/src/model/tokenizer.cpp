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

#include "vitalpeft/model/tokenizer.hpp"

#include <algorithm>
#include <cmath>

#include "vitalpeft/errors.hpp"

namespace vitalpeft::model {

std::size_t value_to_bin(double scaled, const TokenizerConfig& cfg) {
    const double clamped = std::clamp(scaled, cfg.bin_low, cfg.bin_high);
    const auto idx = static_cast<std::size_t>(std::floor((clamped - cfg.bin_low) / cfg.bin_width()));
    return std::min(idx, cfg.n_bins - 1);
}

double bin_center(std::size_t id, const TokenizerConfig& cfg) {
    if (id >= cfg.n_bins) throw ContractError("token " + std::to_string(id) + " is a special token, not a bin");
    return cfg.bin_low + (static_cast<double>(id) + 0.5) * cfg.bin_width();
}

TokenizedSeries tokenize(std::span<const double> context, const TokenizerConfig& cfg) {
    if (context.empty()) throw DataError("cannot tokenize an empty series");
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (!std::isfinite(context[i])) {
            throw DataError("non-finite value at position " + std::to_string(i) + " of context");
        }
        abs_sum += std::abs(context[i]);
    }
    TokenizedSeries out;
    const double mean_abs = abs_sum / static_cast<double>(context.size());
    out.scale = mean_abs > 0.0 ? mean_abs : 1.0;
    out.ids = encode_with_scale(context, out.scale, cfg);
    return out;
}

std::vector<std::size_t> encode_with_scale(std::span<const double> values, double scale,
                                           const TokenizerConfig& cfg) {
    std::vector<std::size_t> ids(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DataError("non-finite value at position " + std::to_string(i));
        ids[i] = value_to_bin(values[i] / scale, cfg);
    }
    return ids;
}

std::vector<double> detokenize(std::span<const std::size_t> ids, double scale, const TokenizerConfig& cfg) {
    std::vector<double> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out[i] = bin_center(ids[i], cfg) * scale;
    return out;
}

}  // namespace vitalpeft::model
