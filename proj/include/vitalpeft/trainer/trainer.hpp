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
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vitalpeft/adapters/adapter.hpp"
#include "vitalpeft/adapters/counting.hpp"
#include "vitalpeft/metrics/metrics.hpp"
#include "vitalpeft/model/transformer.hpp"
#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/pipeline/dataset.hpp"

namespace vitalpeft::trainer {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool operator==(const AdamConfig&) const = default;
};

/// Adam with bias correction over a fixed tensor list. Tensors that do not require
/// gradients are never touched.
class Adam {
public:
    Adam(std::vector<adapters::NamedTensor> params, double lr, AdamConfig cfg = {});

    /// Applies one update from the accumulated gradients. NumericError naming the
    /// tensor when any gradient is non-finite; no tensor is modified in that case.
    void step();
    void zero_grad();

    double learning_rate() const { return lr_; }
    std::size_t steps() const { return t_; }
    const std::vector<double>& first_moment(std::size_t i) const { return m_[i]; }
    const std::vector<double>& second_moment(std::size_t i) const { return v_[i]; }

private:
    std::vector<adapters::NamedTensor> params_;
    double lr_;
    AdamConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

/// Line-per-event `key=value` log. No timestamps, so identical runs give identical logs.
class ExperimentLog {
public:
    using Field = std::pair<std::string, std::string>;

    explicit ExperimentLog(std::ostream* echo = nullptr) : echo_(echo) {}
    void event(const std::string& name, const std::vector<Field>& fields);
    const std::vector<std::string>& lines() const { return lines_; }
    std::string text() const;

private:
    std::ostream* echo_;
    std::vector<std::string> lines_;
};

struct TrainConfig {
    std::vector<double> lr_grid{1e-2, 1e-3, 1e-4, 1e-5};
    std::size_t batch_size = 8;
    std::size_t max_steps = 200;
    std::size_t eval_every = 20;
    std::size_t patience = 5;
    std::size_t val_windows = 0;  // 0 = whole validation split
    metrics::EvalConfig val_eval{20, 1};
    metrics::EvalConfig test_eval{20, 10};
    std::uint64_t seed = 0;
    AdamConfig adam{};

    /// ConfigError on a non-positive learning rate, zero batch size or empty grid.
    void validate() const;
    std::string to_text() const;
    static TrainConfig parse(const std::string& text);
    bool operator==(const TrainConfig&) const = default;
};

/// Fixed-size shuffled batches over `n` items; the last partial batch is kept.
/// A new permutation is drawn from `rng` at each epoch.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch_size, numerics::Rng rng);
    std::vector<std::size_t> next();
    std::size_t epoch() const { return epoch_; }

private:
    void reshuffle();

    std::size_t n_, batch_;
    numerics::Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::size_t epoch_ = 0;
};

/// Mean token cross-entropy of a batch. Builds one graph over all windows.
numerics::Tensor batch_loss(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows,
                            const std::vector<std::size_t>& batch);

/// Mean token cross-entropy over windows without recording a graph.
double mean_loss(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows);

struct PretrainResult {
    std::vector<double> train_losses;  // one per step
    double initial_val_loss = 0.0;
    double final_val_loss = 0.0;
};

/// Trains every base parameter on the source domain with Adam at `learning_rate`
/// for cfg.max_steps steps. Validation loss is logged every cfg.eval_every steps.
PretrainResult pretrain(model::ForecastModel& model, const pipeline::SplitDataset& source, const TrainConfig& cfg,
                        double learning_rate, ExperimentLog* log = nullptr);

struct GridPoint {
    double learning_rate = 0.0;
    double best_val_mse = 0.0;
    std::size_t best_step = 0;
    std::size_t steps_run = 0;
};

struct FinetuneResult {
    model::ForecastModel model;  // base clone with the selected adapter attached
    adapters::AdapterState state;
    std::vector<GridPoint> grid;
    std::optional<double> selected_lr;  // empty for zero-shot
    double val_mse = 0.0;
    metrics::MetricReport test;
    adapters::ParameterBudgetReport budget;
};

/// Runs the learning-rate grid on a clone of `base`, keeps the checkpoint with the lowest
/// validation MSE (step 0 included) for each rate, selects the rate with the lowest
/// value (first wins ties) and evaluates it on the test split. Zero-shot skips training.
/// `base` is never modified.
FinetuneResult finetune(const model::ForecastModel& base, const adapters::AdapterConfig& acfg,
                        const pipeline::SplitDataset& target, const TrainConfig& cfg, ExperimentLog* log = nullptr);

enum class SweepAxis { None, VeraRank, FourierN };
std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view s);
/// Admissible values: {1, 2, 4, 8, 16, 32} for VeRA rank, {25, 50, 100, 200} for FourierFT n.
std::vector<std::size_t> admissible_values(SweepAxis a);

struct ExperimentSpec {
    adapters::AdapterConfig adapter;
    TrainConfig train;
    SweepAxis axis = SweepAxis::None;
    std::vector<std::size_t> values;  // empty = every admissible value

    /// ConfigError when a value is outside the axis set or the axis does not fit the method.
    void validate() const;
};

struct SweepRow {
    std::size_t value = 0;  // 0 for the single row of an axis-free spec
    metrics::MetricReport report;
    std::size_t params = 0;
};

struct SweepTable {
    SweepAxis axis = SweepAxis::None;
    std::vector<SweepRow> rows;  // ordered by axis value
    /// CSV with columns axis value, MSE x1e-4, DTW x1e-3, MAPE %, #Params (M).
    std::string to_table() const;
};

SweepTable sweep(const model::ForecastModel& base, const ExperimentSpec& spec, const pipeline::SplitDataset& target,
                 ExperimentLog* log = nullptr);

}  // namespace vitalpeft::trainer
