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

#include "vitalpeft/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <tuple>

#include "vitalpeft/errors.hpp"

namespace vitalpeft::pipeline {

namespace {

struct VitalProfile {
    const char* name;
    double baseline_mean, baseline_sd, baseline_lo, baseline_hi;
    double noise_sd;
    double shift, trend, lo, hi;
};

const VitalProfile kProfiles[] = {
    {kVitalHR, 78.0, 8.0, 55.0, 110.0, 1.5, kShiftedHrOffset, kHrTrend, kHrMin, kHrMax},
    {kVitalMeanBP, 82.0, 7.0, 60.0, 110.0, 1.2, kShiftedMeanBpOffset, kMeanBpTrend, kMeanBpMin, kMeanBpMax},
};

constexpr double kArPhi = 0.85;
constexpr double kCircadianTicks = 288.0;

std::string patient_name(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%05zu", i + 1);
    return buf;
}

}  // namespace

std::string_view to_string(Domain d) { return d == Domain::Source ? "source" : "shifted"; }

Domain parse_domain(std::string_view s) {
    if (s == "source") return Domain::Source;
    if (s == "shifted") return Domain::Shifted;
    throw ConfigError("unknown domain '" + std::string(s) + "' (expected source or shifted)");
}

SyntheticCohort generate_synthetic(const SyntheticConfig& cfg, const numerics::Rng& rng) {
    if (cfg.n_patients == 0) throw ConfigError("synthetic cohort needs at least one patient");
    if (cfg.grid_seconds <= 0 || cfg.window_ticks == 0) throw ConfigError("grid and window length must be positive");
    if (!(cfg.missing_rate >= 0.0 && cfg.missing_rate < 1.0)) throw ConfigError("missing_rate must lie in [0, 1)");
    if (!(cfg.two_anchor_fraction >= 0.0 && cfg.two_anchor_fraction <= 1.0)) {
        throw ConfigError("two_anchor_fraction must lie in [0, 1]");
    }

    // Exactly round(fraction * n) patients carry a second anchor.
    const auto n_two = static_cast<std::size_t>(std::llround(cfg.two_anchor_fraction * static_cast<double>(cfg.n_patients)));
    std::vector<std::size_t> order(cfg.n_patients);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto pick = rng.child("two-anchor");
    for (std::size_t i = 0; i < n_two; ++i) std::swap(order[i], order[i + pick.below(order.size() - i)]);
    std::vector<bool> two(cfg.n_patients, false);
    for (std::size_t i = 0; i < n_two; ++i) two[order[i]] = true;

    const bool shifted = cfg.domain == Domain::Shifted;
    const auto step = cfg.grid_seconds;
    SyntheticCohort out;
    for (std::size_t p = 0; p < cfg.n_patients; ++p) {
        auto pr = rng.child(static_cast<std::uint64_t>(p));
        const auto id = patient_name(p);
        const std::size_t lead = pr.below(37);
        const std::int64_t start = cfg.start_time + static_cast<std::int64_t>(pr.below(288)) * step;
        std::vector<std::size_t> anchor_ticks{lead + cfg.window_ticks};
        if (two[p]) anchor_ticks.push_back(anchor_ticks[0] + cfg.window_ticks + pr.below(73));
        const std::size_t n_ticks = anchor_ticks.back();
        for (auto a : anchor_ticks) out.anchors.push_back({id, start + static_cast<std::int64_t>(a) * step});

        for (std::size_t v = 0; v < std::size(kProfiles); ++v) {
            const auto& prof = kProfiles[v];
            auto vr = pr.child(static_cast<std::uint64_t>(v));
            const double baseline =
                std::clamp(vr.normal(prof.baseline_mean, prof.baseline_sd), prof.baseline_lo, prof.baseline_hi);
            const double slow_amp = vr.uniform(1.0, 5.0);
            const double slow_period = vr.uniform(24.0, 96.0);
            const double slow_phase = vr.uniform(0.0, 2.0 * std::numbers::pi);
            const double circ_amp = vr.uniform(1.0, 4.0);
            const double circ_phase = vr.uniform(0.0, 2.0 * std::numbers::pi);
            double ar = vr.normal(0.0, prof.noise_sd / std::sqrt(1.0 - kArPhi * kArPhi));

            for (std::size_t k = 0; k < n_ticks; ++k) {
                if (k > 0) ar = kArPhi * ar + vr.normal(0.0, prof.noise_sd);
                const bool missing = k > 0 && vr.uniform() < cfg.missing_rate;
                const double t = static_cast<double>(k);
                double value = baseline + slow_amp * std::sin(2.0 * std::numbers::pi * t / slow_period + slow_phase) +
                               circ_amp * std::sin(2.0 * std::numbers::pi * t / kCircadianTicks + circ_phase) + ar;
                if (shifted) {
                    value += prof.shift;
                    for (auto a : anchor_ticks) {
                        if (k < a && k + kTrendTicks >= a) {
                            value += prof.trend * static_cast<double>(k + kTrendTicks + 1 - a) /
                                     static_cast<double>(kTrendTicks);
                        }
                    }
                }
                value = std::clamp(value, prof.lo, prof.hi);
                if (missing) continue;
                out.records.push_back({id, prof.name, start + static_cast<std::int64_t>(k) * step, value});
            }
        }
    }
    std::stable_sort(out.records.begin(), out.records.end(), [](const VitalsRecord& a, const VitalsRecord& b) {
        return std::tie(a.patient_id, a.vital, a.timestamp) < std::tie(b.patient_id, b.vital, b.timestamp);
    });
    return out;
}

}  // namespace vitalpeft::pipeline
