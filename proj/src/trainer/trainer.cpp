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

#include "vitalpeft/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/numerics/ops.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::trainer {

using numerics::Tensor;
using Field = ExperimentLog::Field;

namespace {

Field num(const std::string& key, double v) { return {key, format_double(v)}; }
Field num(const std::string& key, std::size_t v) { return {key, std::to_string(v)}; }

void log_event(ExperimentLog* log, const std::string& name, const std::vector<Field>& fields) {
    if (log) log->event(name, fields);
}

// Evenly spaced subset of at most `cap` windows; cap 0 keeps everything.
std::vector<pipeline::VitalsWindow> capped(const std::vector<pipeline::VitalsWindow>& windows, std::size_t cap) {
    if (cap == 0 || windows.size() <= cap) return windows;
    std::vector<pipeline::VitalsWindow> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) out.push_back(windows[i * windows.size() / cap]);
    return out;
}

std::vector<std::vector<double>> snapshot(const std::vector<adapters::NamedTensor>& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
    return out;
}

void restore(std::vector<adapters::NamedTensor>& params, const std::vector<std::vector<double>>& values) {
    for (std::size_t i = 0; i < params.size(); ++i) std::copy(values[i].begin(), values[i].end(), params[i].tensor.data().begin());
}

std::vector<double> parse_real_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_real(trim(item), what));
    return out;
}

}  // namespace

Adam::Adam(std::vector<adapters::NamedTensor> params, double lr, AdamConfig cfg)
    : params_(std::move(params)), lr_(lr), cfg_(cfg) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be positive and finite");
    for (const auto& p : params_) {
        m_.emplace_back(p.tensor.numel(), 0.0);
        v_.emplace_back(p.tensor.numel(), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_)
        if (p.tensor.has_grad()) p.tensor.zero_grad();
}

void Adam::step() {
    for (const auto& p : params_) {
        if (!p.tensor.requires_grad() || !p.tensor.has_grad()) continue;
        const auto g = p.tensor.grad();
        for (std::size_t j = 0; j < g.size(); ++j) {
            if (!std::isfinite(g[j])) {
                throw NumericError("non-finite gradient in '" + p.name + "' at element " + std::to_string(j) +
                                   " after step " + std::to_string(t_));
            }
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p.tensor.requires_grad()) continue;
        auto w = p.tensor.data();
        auto& m = m_[i];
        auto& v = v_[i];
        const bool has = p.tensor.has_grad();
        const auto g = has ? p.tensor.grad() : std::span<const double>{};
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double gj = has ? g[j] : 0.0;
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj;
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj;
            w[j] -= lr_ * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
        }
    }
}

void ExperimentLog::event(const std::string& name, const std::vector<Field>& fields) {
    std::string line = "event=" + name;
    for (const auto& [k, v] : fields) line += " " + k + "=" + v;
    if (echo_) *echo_ << line << "\n";
    lines_.push_back(std::move(line));
}

std::string ExperimentLog::text() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
}

void TrainConfig::validate() const {
    if (lr_grid.empty()) throw ConfigError("lr_grid must not be empty");
    for (double lr : lr_grid)
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("learning rates must be positive and finite");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (eval_every == 0) throw ConfigError("eval_every must be >= 1");
    if (patience == 0) throw ConfigError("patience must be >= 1");
    if (val_eval.n_samples == 0 || val_eval.n_runs == 0 || test_eval.n_samples == 0 || test_eval.n_runs == 0)
        throw ConfigError("evaluation sample and run counts must be >= 1");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0))
        throw ConfigError("adam betas must lie in [0, 1) and eps must be positive");
}

std::string TrainConfig::to_text() const {
    std::ostringstream out;
    out << "lr_grid = ";
    for (std::size_t i = 0; i < lr_grid.size(); ++i) out << (i ? "," : "") << format_double(lr_grid[i]);
    out << "\nbatch_size = " << batch_size << "\nmax_steps = " << max_steps << "\neval_every = " << eval_every
        << "\npatience = " << patience << "\nval_windows = " << val_windows << "\nval_samples = " << val_eval.n_samples
        << "\nval_runs = " << val_eval.n_runs << "\ntest_samples = " << test_eval.n_samples
        << "\ntest_runs = " << test_eval.n_runs << "\nseed = " << seed << "\nadam_beta1 = " << format_double(adam.beta1)
        << "\nadam_beta2 = " << format_double(adam.beta2) << "\nadam_eps = " << format_double(adam.eps) << "\n";
    return out.str();
}

TrainConfig TrainConfig::parse(const std::string& text) {
    TrainConfig c;
    for (const auto& [k, v] : parse_key_values(text)) {
        if (k == "lr_grid") c.lr_grid = parse_real_list(v, k);
        else if (k == "batch_size") c.batch_size = parse_size(v, k);
        else if (k == "max_steps") c.max_steps = parse_size(v, k);
        else if (k == "eval_every") c.eval_every = parse_size(v, k);
        else if (k == "patience") c.patience = parse_size(v, k);
        else if (k == "val_windows") c.val_windows = parse_size(v, k);
        else if (k == "val_samples") c.val_eval.n_samples = parse_size(v, k);
        else if (k == "val_runs") c.val_eval.n_runs = parse_size(v, k);
        else if (k == "test_samples") c.test_eval.n_samples = parse_size(v, k);
        else if (k == "test_runs") c.test_eval.n_runs = parse_size(v, k);
        else if (k == "seed") c.seed = parse_u64(v, k);
        else if (k == "adam_beta1") c.adam.beta1 = parse_real(v, k);
        else if (k == "adam_beta2") c.adam.beta2 = parse_real(v, k);
        else if (k == "adam_eps") c.adam.eps = parse_real(v, k);
        else throw ConfigError("unknown training key '" + k + "'");
    }
    c.validate();
    return c;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, numerics::Rng rng)
    : n_(n), batch_(batch_size), rng_(std::move(rng)) {
    if (n == 0) throw DataError("cannot batch an empty training set");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    order_.resize(n);
    reshuffle();
}

void BatchSampler::reshuffle() {
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    for (std::size_t i = n_; i-- > 1;) std::swap(order_[i], order_[rng_.below(i + 1)]);
    cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
    if (cursor_ == n_) {
        ++epoch_;
        reshuffle();
    }
    const std::size_t end = std::min(n_, cursor_ + batch_);
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
    cursor_ = end;
    return out;
}

Tensor batch_loss(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows,
                  const std::vector<std::size_t>& batch) {
    if (batch.empty()) throw ContractError("empty batch");
    Tensor total;
    for (std::size_t i : batch) {
        const auto& w = windows.at(i);
        auto l = model.window_loss(w.context, w.horizon);
        total = total.defined() ? numerics::add(total, l) : l;
    }
    return numerics::scale(total, 1.0 / static_cast<double>(batch.size()));
}

double mean_loss(const model::ForecastModel& model, const std::vector<pipeline::VitalsWindow>& windows) {
    if (windows.empty()) throw DataError("mean_loss over an empty set");
    numerics::NoGradGuard no_grad;
    double acc = 0.0;
    for (const auto& w : windows) acc += model.window_loss(w.context, w.horizon).item();
    return acc / static_cast<double>(windows.size());
}

PretrainResult pretrain(model::ForecastModel& model, const pipeline::SplitDataset& source, const TrainConfig& cfg,
                        double learning_rate, ExperimentLog* log) {
    cfg.validate();
    if (source.train.empty()) throw DataError("pretrain: empty source training split");
    model.parameters().set_all_trainable(true);
    std::vector<adapters::NamedTensor> params;
    for (auto& p : model.parameters()) params.push_back({p.name, p.tensor});
    Adam opt(params, learning_rate, cfg.adam);
    BatchSampler sampler(source.train.size(), cfg.batch_size, numerics::Rng(cfg.seed).child("pretrain.batches"));
    const auto val = capped(source.val.empty() ? source.train : source.val, cfg.val_windows);

    PretrainResult result;
    result.initial_val_loss = mean_loss(model, val);
    log_event(log, "pretrain_start", {num("lr", learning_rate), num("steps", cfg.max_steps),
                                      num("batch_size", cfg.batch_size), num("val_loss", result.initial_val_loss)});
    for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
        opt.zero_grad();
        auto loss = batch_loss(model, source.train, sampler.next());
        const double value = loss.item();
        if (!std::isfinite(value)) throw NumericError("pretrain diverged at step " + std::to_string(step));
        numerics::backward(loss);
        opt.step();
        result.train_losses.push_back(value);
        if (step % cfg.eval_every == 0 || step == cfg.max_steps) {
            const double vl = mean_loss(model, val);
            log_event(log, "pretrain_eval", {num("step", step), num("train_loss", value), num("val_loss", vl)});
        }
    }
    opt.zero_grad();
    result.final_val_loss = mean_loss(model, val);
    log_event(log, "pretrain_end", {num("val_loss", result.final_val_loss)});
    return result;
}

namespace {

struct Candidate {
    model::ForecastModel model;
    adapters::AdapterState state;
    GridPoint point;
};

Candidate train_one(const model::ForecastModel& base, const adapters::AdapterConfig& acfg,
                    const pipeline::SplitDataset& target, const std::vector<pipeline::VitalsWindow>& val,
                    const TrainConfig& cfg, std::size_t grid_index, double initial_val, ExperimentLog* log) {
    const numerics::Rng master(cfg.seed);
    auto m = base.clone();
    auto init = master.child("adapter.init");
    auto state = adapters::attach(m, acfg, init);
    const double lr = cfg.lr_grid[grid_index];
    const auto val_rng = master.child("val");
    auto val_mse = [&] { return metrics::evaluate(m, val, cfg.val_eval, val_rng).mse_raw; };

    auto params = adapters::trainable_tensors(m, state);
    Adam opt(params, lr, cfg.adam);
    BatchSampler sampler(target.train.size(), cfg.batch_size, master.child("finetune.batches").child(grid_index));

    GridPoint point{lr, initial_val, 0, 0};
    auto best = snapshot(params);
    std::size_t stale = 0;
    log_event(log, "finetune_eval", {{"method", std::string(to_string(acfg.method))}, num("lr", lr), num("step", std::size_t{0}),
                                     num("val_mse", point.best_val_mse)});
    for (std::size_t step = 1; step <= cfg.max_steps; ++step) {
        opt.zero_grad();
        auto loss = batch_loss(m, target.train, sampler.next());
        const double value = loss.item();
        if (!std::isfinite(value)) throw NumericError("finetune diverged at step " + std::to_string(step));
        numerics::backward(loss);
        opt.step();
        point.steps_run = step;
        if (step % cfg.eval_every != 0 && step != cfg.max_steps) continue;
        const double v = val_mse();
        log_event(log, "finetune_eval", {{"method", std::string(to_string(acfg.method))}, num("lr", lr), num("step", step),
                                         num("train_loss", value), num("val_mse", v)});
        if (v < point.best_val_mse) {
            point.best_val_mse = v;
            point.best_step = step;
            best = snapshot(params);
            stale = 0;
        } else if (++stale >= cfg.patience) {
            break;
        }
    }
    opt.zero_grad();
    restore(params, best);
    return {std::move(m), std::move(state), point};
}

}  // namespace

FinetuneResult finetune(const model::ForecastModel& base, const adapters::AdapterConfig& acfg,
                        const pipeline::SplitDataset& target, const TrainConfig& cfg, ExperimentLog* log) {
    cfg.validate();
    acfg.validate(base.config());
    if (target.test.empty()) throw DataError("finetune: empty test split");
    if (target.val.empty()) throw DataError("finetune: empty validation split");
    const auto val = capped(target.val, cfg.val_windows);
    const numerics::Rng master(cfg.seed);
    const std::string method(to_string(acfg.method));
    log_event(log, "finetune_start", {{"method", method}, {"targets", adapters::targets_to_string(acfg.targets)},
                                      num("train_windows", target.train.size()), num("val_windows", val.size())});

    std::optional<Candidate> chosen;
    std::vector<GridPoint> grid;
    std::optional<double> selected;
    if (acfg.method == adapters::Method::ZeroShot) {
        auto m = base.clone();
        auto init = master.child("adapter.init");
        auto state = adapters::attach(m, acfg, init);
        const double v = metrics::evaluate(m, val, cfg.val_eval, master.child("val")).mse_raw;
        chosen.emplace(Candidate{std::move(m), std::move(state), GridPoint{0.0, v, 0, 0}});
    } else {
        if (target.train.empty()) throw DataError("finetune: empty training split");
        // Every grid point starts from the same attached model, so step 0 is scored once.
        double initial_val = 0.0;
        {
            auto m = base.clone();
            auto init = master.child("adapter.init");
            adapters::attach(m, acfg, init);
            initial_val = metrics::evaluate(m, val, cfg.val_eval, master.child("val")).mse_raw;
        }
        for (std::size_t i = 0; i < cfg.lr_grid.size(); ++i) {
            auto c = train_one(base, acfg, target, val, cfg, i, initial_val, log);
            grid.push_back(c.point);
            log_event(log, "grid_point", {{"method", method}, num("lr", c.point.learning_rate),
                                          num("best_val_mse", c.point.best_val_mse), num("best_step", c.point.best_step),
                                          num("steps_run", c.point.steps_run)});
            if (!chosen || c.point.best_val_mse < chosen->point.best_val_mse) chosen.emplace(std::move(c));
        }
        selected = chosen->point.learning_rate;
        log_event(log, "lr_selected", {{"method", method}, num("lr", *selected), num("val_mse", chosen->point.best_val_mse)});
    }

    auto test = metrics::evaluate(chosen->model, target.test, cfg.test_eval, master.child("test"));
    auto budget = adapters::count_trainable_params(acfg, base.config());
    log_event(log, "test", {{"method", method}, num("mse", test.mse_raw), num("dtw", test.dtw_raw),
                            num("mape", test.mape_percent), num("params", budget.total)});
    const double val_mse = chosen->point.best_val_mse;
    return {std::move(chosen->model), std::move(chosen->state), std::move(grid), selected, val_mse, std::move(test),
            std::move(budget)};
}

std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::None: return "none";
        case SweepAxis::VeraRank: return "vera_rank";
        case SweepAxis::FourierN: return "fourier_n";
    }
    return "none";
}

SweepAxis parse_sweep_axis(std::string_view s) {
    if (s == "none" || s.empty()) return SweepAxis::None;
    if (s == "vera_rank") return SweepAxis::VeraRank;
    if (s == "fourier_n") return SweepAxis::FourierN;
    throw ConfigError("unknown sweep axis '" + std::string(s) + "' (expected none, vera_rank or fourier_n)");
}

std::vector<std::size_t> admissible_values(SweepAxis a) {
    switch (a) {
        case SweepAxis::None: return {};
        case SweepAxis::VeraRank: return {1, 2, 4, 8, 16, 32};
        case SweepAxis::FourierN: return {25, 50, 100, 200};
    }
    return {};
}

void ExperimentSpec::validate() const {
    train.validate();
    if (axis == SweepAxis::None) {
        if (!values.empty()) throw ConfigError("sweep values given without a sweep axis");
        return;
    }
    if (axis == SweepAxis::VeraRank && adapter.method != adapters::Method::VeRA)
        throw ConfigError("vera_rank sweep needs method vera");
    if (axis == SweepAxis::FourierN && adapter.method != adapters::Method::FourierFT)
        throw ConfigError("fourier_n sweep needs method fourierft");
    const auto ok = admissible_values(axis);
    for (auto v : values) {
        if (std::find(ok.begin(), ok.end(), v) == ok.end())
            throw ConfigError("value " + std::to_string(v) + " is not admissible for " + std::string(to_string(axis)));
    }
}

SweepTable sweep(const model::ForecastModel& base, const ExperimentSpec& spec, const pipeline::SplitDataset& target,
                 ExperimentLog* log) {
    spec.validate();
    SweepTable table;
    table.axis = spec.axis;
    std::vector<std::size_t> values = spec.values.empty() ? admissible_values(spec.axis) : spec.values;
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (spec.axis == SweepAxis::None) values = {0};
    for (auto v : values) {
        auto acfg = spec.adapter;
        if (spec.axis == SweepAxis::VeraRank) acfg.rank = v;
        if (spec.axis == SweepAxis::FourierN) acfg.n_coefficients = v;
        log_event(log, "sweep_point", {{"axis", std::string(to_string(spec.axis))}, num("value", v)});
        auto r = finetune(base, acfg, target, spec.train, log);
        table.rows.push_back({v, std::move(r.test), r.budget.total});
    }
    return table;
}

std::string SweepTable::to_table() const {
    std::ostringstream out;
    out << to_string(axis) << ",MSE x1e-4,DTW x1e-3,MAPE %,#Params (M)\n";
    for (const auto& r : rows) {
        out << r.value << "," << format_double(r.report.mse_norm()) << "," << format_double(r.report.dtw_norm()) << ","
            << format_double(r.report.mape_percent) << "," << adapters::round_millions(r.params, 4) << "\n";
    }
    return out.str();
}

}  // namespace vitalpeft::trainer
