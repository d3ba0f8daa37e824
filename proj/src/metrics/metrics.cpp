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

#include "vitalpeft/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/model/forecast.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::metrics {

namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth, const char* what) {
    if (pred.size() != truth.size()) {
        throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(pred.size()) + " vs " +
                             std::to_string(truth.size()));
    }
    if (pred.empty()) throw DimensionError(std::string(what) + ": empty series");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
    check_pair(pred, truth, "mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> truth, double eps) {
    check_pair(pred, truth, "mape");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += std::abs(pred[i] - truth[i]) / std::max(std::abs(truth[i]), eps);
    return 100.0 * acc / static_cast<double>(pred.size());
}

double dtw(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DimensionError("dtw: empty series");
    const std::size_t n = b.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Two rows of the (m+1) x (n+1) table; D[0][0] = 0, other borders infinite.
    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = inf;
        for (std::size_t j = 1; j <= n; ++j) {
            const double d = a[i - 1] - b[j - 1];
            cur[j] = d * d + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[n];
}

RunMetrics score(std::span<const double> point, std::span<const double> truth) {
    return {mse(point, truth), dtw(point, truth), mape(point, truth)};
}

MetricReport aggregate(std::vector<RunMetrics> runs, std::size_t n_windows, std::size_t n_samples) {
    if (runs.empty()) throw DataError("aggregate needs at least one run");
    MetricReport r;
    for (const auto& m : runs) {
        r.mse_raw += m.mse;
        r.dtw_raw += m.dtw;
        r.mape_percent += m.mape;
    }
    const auto k = static_cast<double>(runs.size());
    r.mse_raw /= k;
    r.dtw_raw /= k;
    r.mape_percent /= k;
    r.n_windows = n_windows;
    r.n_samples = n_samples;
    r.runs = std::move(runs);
    return r;
}

std::string window_label(const pipeline::WindowKey& key) {
    return key.patient_id + "|" + key.vital + "|" + std::to_string(key.anchor_time);
}

MetricReport evaluate(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows,
                      const EvalConfig& cfg, const numerics::Rng& rng) {
    if (windows.empty()) throw DataError("evaluate: empty test set");
    if (cfg.n_samples == 0 || cfg.n_runs == 0) throw ConfigError("evaluate: n_samples and n_runs must be >= 1");

    std::vector<const pipeline::VitalsWindow*> order;
    order.reserve(windows.size());
    for (const auto& w : windows) order.push_back(&w);
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->key() < b->key(); });

    std::vector<RunMetrics> runs;
    runs.reserve(cfg.n_runs);
    for (std::size_t run = 0; run < cfg.n_runs; ++run) {
        const numerics::Rng run_rng = rng.child(run);
        RunMetrics sum;
        for (const auto* w : order) {
            const auto f = model::sample_forecast(model, w->context, cfg.n_samples,
                                                  run_rng.child(window_label(w->key())));
            const auto m = score(f.point, w->horizon);
            sum.mse += m.mse;
            sum.dtw += m.dtw;
            sum.mape += m.mape;
        }
        const auto n = static_cast<double>(order.size());
        runs.push_back({sum.mse / n, sum.dtw / n, sum.mape / n});
    }
    return aggregate(std::move(runs), windows.size(), cfg.n_samples);
}

std::string MetricReport::to_text(const std::string& title) const {
    std::ostringstream out;
    out << title << "\n";
    out << "  windows: " << n_windows << "  runs: " << n_runs() << "  samples per forecast: " << n_samples << "\n";
    out << "  MSE x1e-4: " << format_fixed(mse_norm(), 4) << "\n";
    out << "  DTW x1e-3: " << format_fixed(dtw_norm(), 4) << "\n";
    out << "  MAPE %:    " << format_fixed(mape_percent, 4) << "\n";
    return out.str();
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    out << "run,MSE x1e-4,DTW x1e-3,MAPE %\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out << i << "," << format_double(runs[i].mse / kMseUnit) << "," << format_double(runs[i].dtw / kDtwUnit)
            << "," << format_double(runs[i].mape) << "\n";
    }
    out << "mean," << format_double(mse_norm()) << "," << format_double(dtw_norm()) << ","
        << format_double(mape_percent) << "\n";
    return out.str();
}

}  // namespace vitalpeft::metrics
