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

#include "vitalpeft/adapters/adapter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/numerics/ops.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::adapters {

namespace {

using model::Projection;
using numerics::Tensor;

std::string normalize_token(std::string_view s) {
    std::string out;
    for (char ch : s) {
        if (ch == '-' || ch == '_' || ch == ' ') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

std::string shape_key(std::size_t d_out, std::size_t d_in) {
    return std::to_string(d_out) + "x" + std::to_string(d_in);
}

Tensor uniform_tensor(numerics::Shape shape, double bound, numerics::Rng& rng) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::ZeroShot: return "zero-shot";
        case Method::FullFT: return "full-ft";
        case Method::BitFit: return "bitfit";
        case Method::LNTuning: return "ln-tuning";
        case Method::LoRA: return "lora";
        case Method::VeRA: return "vera";
        case Method::FourierFT: return "fourierft";
    }
    return "?";
}

std::string_view to_string(BitFitScope s) {
    return s == BitFitScope::AllBiases ? "all-biases" : "final-norm-only";
}

std::string_view to_string(LnScope s) { return s == LnScope::Attention ? "attention" : "all"; }

Method parse_method(std::string_view s) {
    const auto key = normalize_token(s);
    for (auto m : all_methods()) {
        if (normalize_token(to_string(m)) == key) return m;
    }
    throw ConfigError("unknown adapter method '" + std::string(s) +
                      "' (expected zero-shot, full-ft, bitfit, ln-tuning, lora, vera or fourierft)");
}

BitFitScope parse_bitfit_scope(std::string_view s) {
    const auto key = normalize_token(s);
    if (key == "allbiases") return BitFitScope::AllBiases;
    if (key == "finalnormonly") return BitFitScope::FinalNormOnly;
    throw ConfigError("unknown bitfit scope '" + std::string(s) + "' (expected all-biases or final-norm-only)");
}

LnScope parse_ln_scope(std::string_view s) {
    const auto key = normalize_token(s);
    if (key == "attention") return LnScope::Attention;
    if (key == "all") return LnScope::All;
    throw ConfigError("unknown ln scope '" + std::string(s) + "' (expected attention or all)");
}

std::vector<Method> all_methods() {
    return {Method::ZeroShot, Method::FullFT, Method::BitFit, Method::LNTuning,
            Method::LoRA,     Method::VeRA,   Method::FourierFT};
}

bool is_additive(Method m) { return m == Method::LoRA || m == Method::VeRA || m == Method::FourierFT; }
bool is_selective(Method m) { return m == Method::BitFit || m == Method::LNTuning; }

std::string targets_to_string(const std::vector<Projection>& targets) {
    std::string out;
    for (auto p : targets) out += std::string(model::to_string(p));
    return out;
}

std::vector<Projection> parse_targets(std::string_view s) {
    std::vector<Projection> out;
    for (char ch : s) {
        if (ch == ',' || ch == ' ') continue;
        const auto p = model::parse_projection(std::string_view(&ch, 1));
        if (!p) throw ConfigError("unknown target matrix '" + std::string(1, ch) + "' (expected q, k, v, o)");
        if (std::find(out.begin(), out.end(), *p) != out.end()) {
            throw ConfigError("target matrix '" + std::string(1, ch) + "' listed twice");
        }
        out.push_back(*p);
    }
    return out;
}

AdapterConfig AdapterConfig::for_method(Method m) {
    AdapterConfig cfg;
    cfg.method = m;
    cfg.rank = m == Method::VeRA ? 16 : 2;
    return cfg;
}

bool AdapterConfig::targets_projection(Projection p) const {
    return std::find(targets.begin(), targets.end(), p) != targets.end();
}

void AdapterConfig::validate(const model::ModelConfig& mcfg) const {
    if (!is_additive(method)) return;
    if (targets.empty()) throw ConfigError("additive adapter needs at least one target matrix");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            if (targets[i] == targets[j]) throw ConfigError("target matrix listed twice");
        }
    }
    if ((method == Method::LoRA || method == Method::VeRA) && rank == 0) {
        throw ConfigError("rank must be >= 1");
    }
    if (method == Method::FourierFT) {
        const std::size_t grid = mcfg.d_model * mcfg.d_model;
        if (n_coefficients == 0 || n_coefficients > grid) {
            throw ConfigError("n_coefficients " + std::to_string(n_coefficients) + " outside [1, " +
                              std::to_string(grid) + "]");
        }
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a positive finite number");
    }
}

std::string AdapterConfig::to_text() const {
    std::ostringstream os;
    os << "method = " << to_string(method) << '\n'
       << "targets = " << targets_to_string(targets) << '\n'
       << "rank = " << rank << '\n'
       << "n_coefficients = " << n_coefficients << '\n'
       << "alpha = " << format_double(alpha) << '\n'
       << "shared_seed = " << shared_seed << '\n'
       << "bitfit_scope = " << to_string(bitfit_scope) << '\n'
       << "ln_scope = " << to_string(ln_scope) << '\n';
    return os.str();
}

AdapterConfig AdapterConfig::parse(const std::string& text) {
    const auto kv = parse_key_values(text);
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("adapter config is missing key '" + key + "'");
        return it->second;
    };
    AdapterConfig cfg;
    cfg.method = parse_method(get("method"));
    cfg.targets = parse_targets(get("targets"));
    cfg.rank = parse_size(get("rank"), "rank");
    cfg.n_coefficients = parse_size(get("n_coefficients"), "n_coefficients");
    cfg.alpha = parse_real(get("alpha"), "alpha");
    cfg.shared_seed = parse_u64(get("shared_seed"), "shared_seed");
    cfg.bitfit_scope = parse_bitfit_scope(get("bitfit_scope"));
    cfg.ln_scope = parse_ln_scope(get("ln_scope"));
    return cfg;
}

bool selects_base_parameter(const AdapterConfig& cfg, const std::string& name, const model::ParamInfo& info) {
    switch (cfg.method) {
        case Method::FullFT: return true;
        case Method::BitFit:
            if (cfg.bitfit_scope == BitFitScope::FinalNormOnly) return name == "decoder.final_norm.bias";
            return info.is_bias;
        case Method::LNTuning:
            if (info.cls != model::ParamClass::LayerNorm) return false;
            return cfg.ln_scope == LnScope::All || info.norm_site == model::NormSite::Attention;
        default: return false;
    }
}

Tensor LoraDelta::apply(const Tensor& x) { return numerics::matmul_nt(numerics::matmul_nt(x, a_), b_); }

Tensor LoraDelta::materialize() {
    numerics::NoGradGuard guard;
    return numerics::matmul(b_, a_);
}

Tensor VeraDelta::apply(const Tensor& x) {
    auto h = numerics::scale_columns(numerics::matmul_nt(x, a_), lambda_d_);
    return numerics::scale_columns(numerics::matmul_nt(h, b_), lambda_b_);
}

Tensor VeraDelta::materialize() {
    numerics::NoGradGuard guard;
    // diag(lb) B diag(ld) A == (B diag(ld) A) with row i scaled by lb[i].
    const auto bd = numerics::scale_columns(b_, lambda_d_);
    auto w = numerics::matmul(bd, a_);
    const std::size_t cols = w.cols();
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) w.at(i, j) *= lambda_b_.data()[i];
    }
    return w;
}

const Tensor& FourierDelta::current() {
    const bool want_graph = numerics::grad_enabled() && c_.requires_grad();
    const auto c = c_.data();
    const bool stale = !cached_.defined() || !std::equal(c.begin(), c.end(), cached_for_.begin(), cached_for_.end());
    if (stale || (want_graph && !cached_.requires_grad())) {
        cached_ = fourier_delta(c_, entries_, d_out_, d_in_, alpha_);
        cached_for_.assign(c.begin(), c.end());
    }
    return cached_;
}

Tensor FourierDelta::apply(const Tensor& x) { return numerics::matmul_nt(x, current()); }

Tensor FourierDelta::materialize() {
    numerics::NoGradGuard guard;
    return fourier_delta(c_, entries_, d_out_, d_in_, alpha_);
}

std::vector<std::string> AdapterState::adapted_targets() const {
    std::vector<std::string> out;
    out.reserve(paths_.size());
    for (const auto& [target, path] : paths_) out.push_back(target);
    return out;
}

std::shared_ptr<model::ProjectionDelta> AdapterState::path(const std::string& target) const {
    for (const auto& [name, p] : paths_) {
        if (name == target) return p;
    }
    return nullptr;
}

AdapterState attach(model::ForecastModel& model, const AdapterConfig& cfg, numerics::Rng& rng) {
    cfg.validate(model.config());
    AdapterState state;
    state.cfg_ = cfg;

    auto& registry = model.parameters();
    for (auto& p : registry) p.tensor.set_requires_grad(selects_base_parameter(cfg, p.name, p.info));
    if (!is_additive(cfg.method)) return state;

    const numerics::Rng shared(cfg.shared_seed);
    std::map<std::string, std::pair<Tensor, Tensor>> vera_shared;
    std::map<std::string, std::shared_ptr<const std::vector<SpectralEntry>>> fourier_entries;

    std::vector<std::string> targets;
    for (const auto& target : model.projection_targets()) {
        const auto suffix = target.substr(target.rfind('.') + 1);
        const auto proj = model::parse_projection(suffix);
        if (proj && cfg.targets_projection(*proj)) targets.push_back(target);
    }
    if (targets.empty()) throw ConfigError("no projection in the model matches the adapter targets");

    for (const auto& target : targets) {
        auto& linear = model.projection(target);
        if (linear.delta) throw ContractError("projection '" + target + "' already carries an adapter");
        const std::size_t d_out = linear.weight.rows();
        const std::size_t d_in = linear.weight.cols();
        const std::string prefix = "adapter." + target + ".";
        std::shared_ptr<model::ProjectionDelta> path;

        switch (cfg.method) {
            case Method::LoRA: {
                auto local = rng.child(target);
                auto a = uniform_tensor({cfg.rank, d_in}, 1.0 / std::sqrt(static_cast<double>(d_in)), local);
                Tensor b({d_out, cfg.rank});
                a.set_requires_grad(true);
                b.set_requires_grad(true);
                state.learnables_.push_back({prefix + "lora_a", a});
                state.learnables_.push_back({prefix + "lora_b", b});
                path = std::make_shared<LoraDelta>(a, b);
                break;
            }
            case Method::VeRA: {
                const auto key = shape_key(d_out, d_in);
                auto it = vera_shared.find(key);
                if (it == vera_shared.end()) {
                    auto ra = shared.child("vera.a." + key);
                    auto rb = shared.child("vera.b." + key);
                    auto a = uniform_tensor({cfg.rank, d_in}, 1.0 / std::sqrt(static_cast<double>(d_in)), ra);
                    auto b = uniform_tensor({d_out, cfg.rank}, 1.0 / std::sqrt(static_cast<double>(cfg.rank)), rb);
                    state.frozen_.push_back({"adapter.vera_shared." + key + ".a", a});
                    state.frozen_.push_back({"adapter.vera_shared." + key + ".b", b});
                    it = vera_shared.emplace(key, std::make_pair(a, b)).first;
                }
                Tensor ld({cfg.rank}, 0.1, true);
                Tensor lb({d_out}, 0.0, true);
                state.learnables_.push_back({prefix + "vera_lambda_d", ld});
                state.learnables_.push_back({prefix + "vera_lambda_b", lb});
                path = std::make_shared<VeraDelta>(it->second.first, it->second.second, ld, lb);
                break;
            }
            case Method::FourierFT: {
                const auto key = shape_key(d_out, d_in);
                auto it = fourier_entries.find(key);
                if (it == fourier_entries.end()) {
                    auto re = shared.child("fourierft.entries." + key);
                    auto entries = std::make_shared<const std::vector<SpectralEntry>>(
                        sample_spectral_entries(d_out, d_in, cfg.n_coefficients, re));
                    it = fourier_entries.emplace(key, std::move(entries)).first;
                }
                Tensor c({cfg.n_coefficients}, 0.0, true);
                state.learnables_.push_back({prefix + "fourier_c", c});
                path = std::make_shared<FourierDelta>(c, it->second, d_out, d_in, cfg.alpha);
                break;
            }
            default: break;
        }
        linear.delta = path;
        state.paths_.emplace_back(target, std::move(path));
    }
    return state;
}

Tensor delta(const AdapterState& state, const std::string& target) {
    if (!is_additive(state.config().method)) {
        throw ContractError(std::string("delta is undefined for method ") + std::string(to_string(state.config().method)));
    }
    auto p = state.path(target);
    if (!p) throw ContractError("projection '" + target + "' is not adapted");
    return p->materialize();
}

void merge(model::ForecastModel& model, AdapterState& state) {
    if (!is_additive(state.cfg_.method)) {
        throw ContractError(std::string("merge is undefined for method ") + std::string(to_string(state.cfg_.method)));
    }
    if (state.merged_) throw ContractError("adapter is already merged");
    for (auto& [target, path] : state.paths_) {
        auto& linear = model.projection(target);
        const auto dw = path->materialize();
        auto w = linear.weight.data();
        const auto d = dw.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += d[i];
        linear.delta = nullptr;
    }
    state.merged_ = true;
}

void unmerge(model::ForecastModel& model, AdapterState& state) {
    if (!is_additive(state.cfg_.method)) {
        throw ContractError(std::string("unmerge is undefined for method ") + std::string(to_string(state.cfg_.method)));
    }
    if (!state.merged_) throw ContractError("adapter is not merged");
    for (auto& [target, path] : state.paths_) {
        auto& linear = model.projection(target);
        const auto dw = path->materialize();
        auto w = linear.weight.data();
        const auto d = dw.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= d[i];
        linear.delta = path;
    }
    state.merged_ = false;
}

void detach(model::ForecastModel& model, AdapterState& state) {
    if (!state.merged_) {
        for (auto& [target, path] : state.paths_) {
            auto& linear = model.projection(target);
            if (linear.delta == path) linear.delta = nullptr;
        }
    }
    state.paths_.clear();
    state.learnables_.clear();
    state.frozen_.clear();
    state.merged_ = false;
}

std::vector<NamedTensor> trainable_tensors(model::ForecastModel& model, const AdapterState& state) {
    std::vector<NamedTensor> out;
    for (auto& p : model.parameters()) {
        if (p.tensor.requires_grad()) out.push_back({p.name, p.tensor});
    }
    for (const auto& l : state.learnables()) out.push_back(l);
    return out;
}

std::size_t live_trainable_count(const model::ForecastModel& model, const AdapterState& state) {
    std::size_t n = model.parameters().trainable_numel();
    for (const auto& l : state.learnables()) {
        if (l.tensor.requires_grad()) n += l.tensor.numel();
    }
    return n;
}

}  // namespace vitalpeft::adapters
