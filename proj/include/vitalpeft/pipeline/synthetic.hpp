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
#include <cstdint>
#include <string_view>
#include <vector>

#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/pipeline/records.hpp"

namespace vitalpeft::pipeline {

enum class Domain { Source, Shifted };
std::string_view to_string(Domain d);
Domain parse_domain(std::string_view s);

// Shifted-domain constants: baseline offsets plus a linear drift over the last
// kTrendTicks ticks before every anchor.
inline constexpr double kShiftedHrOffset = 15.0;
inline constexpr double kShiftedMeanBpOffset = -10.0;
inline constexpr std::size_t kTrendTicks = 48;
inline constexpr double kHrTrend = 20.0;
inline constexpr double kMeanBpTrend = -12.0;
inline constexpr double kHrMin = 40.0, kHrMax = 180.0;
inline constexpr double kMeanBpMin = 30.0, kMeanBpMax = 160.0;

struct SyntheticConfig {
    std::size_t n_patients = 1442;
    Domain domain = Domain::Source;
    double two_anchor_fraction = 0.4;  // round(fraction * n) patients get a second anchor
    double missing_rate = 0.05;        // per tick, never the first tick
    std::int64_t start_time = 1'700'000'100;
    std::int64_t grid_seconds = 300;
    std::size_t window_ticks = 108;
};

struct SyntheticCohort {
    std::vector<VitalsRecord> records;  // sorted by patient, vital, timestamp
    std::vector<Anchor> anchors;        // sorted by patient, time
};

/// Per patient and vital: baseline + slow sinusoid + circadian cycle + AR(1) noise,
/// with random missing ticks. Both domains consume identical random draws, so a
/// shifted cohort is the source cohort plus the documented offsets and drift.
SyntheticCohort generate_synthetic(const SyntheticConfig& cfg, const numerics::Rng& rng);

}  // namespace vitalpeft::pipeline
