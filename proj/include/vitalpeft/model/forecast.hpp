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

#include "vitalpeft/model/transformer.hpp"
#include "vitalpeft/numerics/rng.hpp"

namespace vitalpeft::model {

/// Sampled trajectories plus their per-step median.
struct ForecastResult {
    std::size_t n_samples = 0;
    std::size_t horizon = 0;
    std::vector<double> samples;  // [n_samples x horizon], row-major
    std::vector<double> point;    // [horizon]

    std::span<const double> sample(std::size_t i) const { return {samples.data() + i * horizon, horizon}; }
    bool operator==(const ForecastResult&) const = default;
};

/// Per-column lower median (element (n-1)/2 of the sorted column).
std::vector<double> per_step_median(std::span<const double> samples, std::size_t n_samples, std::size_t horizon);

/// Autoregressive ancestral sampling at temperature 1. Each stream draws from its own
/// child of `rng` (stream index), restricted to bin tokens. The context must have
/// exactly `context_len` values.
ForecastResult sample_forecast(const ForecastModel& model, std::span<const double> context,
                               std::size_t n_samples, const numerics::Rng& rng);

}  // namespace vitalpeft::model
