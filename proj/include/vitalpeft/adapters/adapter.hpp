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

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vitalpeft/adapters/spectral.hpp"
#include "vitalpeft/model/parameters.hpp"
#include "vitalpeft/model/transformer.hpp"
#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/numerics/tensor.hpp"

namespace vitalpeft::adapters {

enum class Method { ZeroShot, FullFT, BitFit, LNTuning, LoRA, VeRA, FourierFT };

/// Which bias-classified parameters BitFit trains.
enum class BitFitScope { AllBiases, FinalNormOnly };
/// Which layer-norm parameters LN Tuning trains.
enum class LnScope { Attention, All };

std::string_view to_string(Method m);
std::string_view to_string(BitFitScope s);
std::string_view to_string(LnScope s);
Method parse_method(std::string_view s);
BitFitScope parse_bitfit_scope(std::string_view s);
LnScope parse_ln_scope(std::string_view s);
std::vector<Method> all_methods();

bool is_additive(Method m);
bool is_selective(Method m);

struct AdapterConfig {
    Method method = Method::ZeroShot;
    std::vector<model::Projection> targets{model::Projection::Q, model::Projection::K, model::Projection::V,
                                           model::Projection::O};
    std::size_t rank = 2;            // LoRA / VeRA
    std::size_t n_coefficients = 50; // FourierFT
    double alpha = 300.0;            // FourierFT
    std::uint64_t shared_seed = 0;
    BitFitScope bitfit_scope = BitFitScope::AllBiases;
    LnScope ln_scope = LnScope::Attention;

    /// Defaults for one method: LoRA r=2, VeRA r=16, FourierFT n=50 and alpha=300.
    static AdapterConfig for_method(Method m);

    /// Throws ConfigError on invalid hyperparameters or targets.
    void validate(const model::ModelConfig& mcfg) const;
    bool targets_projection(model::Projection p) const;

    std::string to_text() const;
    static AdapterConfig parse(const std::string& text);

    bool operator==(const AdapterConfig&) const = default;
};

/// "qkvo" style rendering of a target set and its inverse.
std::string targets_to_string(const std::vector<model::Projection>& targets);
std::vector<model::Projection> parse_targets(std::string_view s);

/// True when `attach` would make this base parameter trainable.
bool selects_base_parameter(const AdapterConfig& cfg, const std::string& name, const model::ParamInfo& info);

struct NamedTensor {
    std::string name;
    numerics::Tensor tensor;
};

/// dW = B * A with learnable A[r x d_in], B[d_out x r].
class LoraDelta final : public model::ProjectionDelta {
public:
    LoraDelta(numerics::Tensor a, numerics::Tensor b) : a_(std::move(a)), b_(std::move(b)) {}
    numerics::Tensor apply(const numerics::Tensor& x) override;
    numerics::Tensor materialize() override;
    const numerics::Tensor& a() const { return a_; }
    const numerics::Tensor& b() const { return b_; }

private:
    numerics::Tensor a_, b_;
};

/// dW = diag(lambda_b) * B * diag(lambda_d) * A with frozen shared A, B.
class VeraDelta final : public model::ProjectionDelta {
public:
    VeraDelta(numerics::Tensor shared_a, numerics::Tensor shared_b, numerics::Tensor lambda_d,
              numerics::Tensor lambda_b)
        : a_(std::move(shared_a)), b_(std::move(shared_b)), lambda_d_(std::move(lambda_d)),
          lambda_b_(std::move(lambda_b)) {}
    numerics::Tensor apply(const numerics::Tensor& x) override;
    numerics::Tensor materialize() override;
    const numerics::Tensor& shared_a() const { return a_; }
    const numerics::Tensor& shared_b() const { return b_; }
    const numerics::Tensor& lambda_d() const { return lambda_d_; }
    const numerics::Tensor& lambda_b() const { return lambda_b_; }

private:
    numerics::Tensor a_, b_, lambda_d_, lambda_b_;
};

/// dW = alpha * Re(IDFT2(S)) with learnable coefficients at frozen shared entries.
/// dW is rebuilt only when the coefficients change or a fresh graph is needed.
class FourierDelta final : public model::ProjectionDelta {
public:
    FourierDelta(numerics::Tensor coefficients, std::shared_ptr<const std::vector<SpectralEntry>> entries,
                 std::size_t d_out, std::size_t d_in, double alpha)
        : c_(std::move(coefficients)), entries_(std::move(entries)), d_out_(d_out), d_in_(d_in), alpha_(alpha) {}
    numerics::Tensor apply(const numerics::Tensor& x) override;
    numerics::Tensor materialize() override;
    const numerics::Tensor& coefficients() const { return c_; }
    const std::shared_ptr<const std::vector<SpectralEntry>>& entries() const { return entries_; }

private:
    const numerics::Tensor& current();

    numerics::Tensor c_;
    std::shared_ptr<const std::vector<SpectralEntry>> entries_;
    std::size_t d_out_, d_in_;
    double alpha_;
    numerics::Tensor cached_;
    std::vector<double> cached_for_;
};

/// Result of attach(): learnable tensors created by the adapter, its frozen shared
/// state, and the projection paths it installed.
class AdapterState {
public:
    const AdapterConfig& config() const { return cfg_; }

    /// Tensors created by the adapter and trained with it (empty for selective methods).
    const std::vector<NamedTensor>& learnables() const { return learnables_; }
    /// Frozen state shared across adapted projections (VeRA A/B).
    const std::vector<NamedTensor>& frozen() const { return frozen_; }
    /// Targets carrying an additive path, in model order.
    std::vector<std::string> adapted_targets() const;
    std::shared_ptr<model::ProjectionDelta> path(const std::string& target) const;

    bool merged() const { return merged_; }

private:
    friend AdapterState attach(model::ForecastModel&, const AdapterConfig&, numerics::Rng&);
    friend void merge(model::ForecastModel&, AdapterState&);
    friend void unmerge(model::ForecastModel&, AdapterState&);
    friend void detach(model::ForecastModel&, AdapterState&);

    AdapterConfig cfg_;
    std::vector<NamedTensor> learnables_;
    std::vector<NamedTensor> frozen_;
    std::vector<std::pair<std::string, std::shared_ptr<model::ProjectionDelta>>> paths_;
    bool merged_ = false;
};

/// Freezes the base model, then selects or creates the method's trainable tensors.
/// `rng` initializes per-target learnables; frozen shared state comes from cfg.shared_seed.
AdapterState attach(model::ForecastModel& model, const AdapterConfig& cfg, numerics::Rng& rng);

/// ΔW of one adapted projection. ContractError for selective methods or unadapted targets.
numerics::Tensor delta(const AdapterState& state, const std::string& target);

/// W += ΔW for every adapted projection and remove the adapter paths.
void merge(model::ForecastModel& model, AdapterState& state);
/// Inverse of merge: W -= ΔW and reinstall the paths.
void unmerge(model::ForecastModel& model, AdapterState& state);
/// Remove adapter paths without touching base weights.
void detach(model::ForecastModel& model, AdapterState& state);

/// Everything an optimizer should update: trainable base parameters plus adapter learnables.
std::vector<NamedTensor> trainable_tensors(model::ForecastModel& model, const AdapterState& state);
std::size_t live_trainable_count(const model::ForecastModel& model, const AdapterState& state);

}  // namespace vitalpeft::adapters
