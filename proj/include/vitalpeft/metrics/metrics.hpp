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
#include <string>
#include <vector>

#include "vitalpeft/model/transformer.hpp"
#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/pipeline/windows.hpp"

namespace vitalpeft::metrics {

constexpr double kMseUnit = 1e-4;
constexpr double kDtwUnit = 1e-3;
constexpr double kMapeEps = 1e-8;

/// Mean squared difference. DimensionError on length mismatch or empty input.
double mse(std::span<const double> pred, std::span<const double> truth);

/// 100 * mean(|pred - truth| / max(|truth|, eps)).
double mape(std::span<const double> pred, std::span<const double> truth, double eps = kMapeEps);

/// Unconstrained DTW with squared local cost and match/insert/delete steps; returns D[m, n]
/// without path normalization. DimensionError when either series is empty.
double dtw(std::span<const double> a, std::span<const double> b);

struct RunMetrics {
    double mse = 0.0;
    double dtw = 0.0;
    double mape = 0.0;
    bool operator==(const RunMetrics&) const = default;
};

/// Metrics of one point forecast against its truth.
RunMetrics score(std::span<const double> point, std::span<const double> truth);

struct MetricReport {
    double mse_raw = 0.0;
    double dtw_raw = 0.0;
    double mape_percent = 0.0;
    std::size_t n_windows = 0;
    std::size_t n_samples = 0;
    std::vector<RunMetrics> runs;

    double mse_norm() const { return mse_raw / kMseUnit; }
    double dtw_norm() const { return dtw_raw / kDtwUnit; }
    std::size_t n_runs() const { return runs.size(); }

    /// Human-readable block in normalized units.
    std::string to_text(const std::string& title) const;
    /// CSV: header, one row per run, then a "mean" row. Values are round-trippable.
    std::string to_table() const;

    bool operator==(const MetricReport&) const = default;
};

/// Mean over runs of per-run window means.
MetricReport aggregate(std::vector<RunMetrics> runs, std::size_t n_windows, std::size_t n_samples);

struct EvalConfig {
    std::size_t n_samples = 20;
    std::size_t n_runs = 10;
    bool operator==(const EvalConfig&) const = default;
};

/// For each run, samples `n_samples` trajectories per window from rng.child(run) and the
/// window key, scores the per-step median and averages over windows in key order, so the
/// result does not depend on the order of `windows`. DataError when `windows` is empty.
MetricReport evaluate(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows,
                      const EvalConfig& cfg, const numerics::Rng& rng);

/// Seed label of one window inside a run.
std::string window_label(const pipeline::WindowKey& key);

}  // namespace vitalpeft::metrics
