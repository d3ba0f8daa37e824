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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vitalpeft/model/config.hpp"
#include "vitalpeft/model/parameters.hpp"
#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/numerics/tensor.hpp"

namespace vitalpeft::model {

/// Additive update path attached to one projection: y += x * dW^T.
class ProjectionDelta {
public:
    virtual ~ProjectionDelta() = default;
    /// x[T x d_in] -> x * dW^T, differentiable w.r.t. the adapter's learnables.
    virtual numerics::Tensor apply(const numerics::Tensor& x) = 0;
    /// Current dW[d_out x d_in] as plain values.
    virtual numerics::Tensor materialize() = 0;
};

struct Linear {
    numerics::Tensor weight;  // [d_out x d_in]
    numerics::Tensor bias;    // [d_out], undefined when the config omits linear biases
    std::shared_ptr<ProjectionDelta> delta;

    numerics::Tensor forward(const numerics::Tensor& x) const;
};

struct LayerNorm {
    numerics::Tensor scale;
    numerics::Tensor bias;
    numerics::Tensor forward(const numerics::Tensor& x) const;
};

struct AttentionProjections {
    Linear q, k, v, o;
    Linear& get(Projection p);
};

struct FeedForward {
    Linear wi, wo;
    numerics::Tensor forward(const numerics::Tensor& x) const;
};

struct EncoderLayer {
    LayerNorm self_attn_norm;
    AttentionProjections self_attn;
    LayerNorm ff_norm;
    FeedForward ff;
};

struct DecoderLayer {
    LayerNorm self_attn_norm;
    AttentionProjections self_attn;
    LayerNorm cross_attn_norm;
    AttentionProjections cross_attn;
    LayerNorm ff_norm;
    FeedForward ff;
};

/// Pre-norm encoder-decoder transformer over binned series tokens with a tied
/// output head. Not copyable (tensors are shared handles); use clone().
class ForecastModel {
public:
    ForecastModel(ModelConfig cfg, numerics::Rng& rng);

    ForecastModel(ForecastModel&&) noexcept = default;
    ForecastModel& operator=(ForecastModel&&) noexcept = default;
    ForecastModel(const ForecastModel&) = delete;
    ForecastModel& operator=(const ForecastModel&) = delete;

    /// Deep copy of all base weights; adapter paths are not carried over.
    ForecastModel clone() const;

    const ModelConfig& config() const { return cfg_; }
    ParameterRegistry& parameters() { return registry_; }
    const ParameterRegistry& parameters() const { return registry_; }

    Linear& projection(const std::string& target);
    std::vector<std::string> projection_targets() const;

    /// Encoder states [context x d_model].
    numerics::Tensor encode(std::span<const std::size_t> context_ids) const;
    /// Logits [steps x vocab]; step t sees decoder tokens 0..t only.
    numerics::Tensor decode(const numerics::Tensor& memory, std::span<const std::size_t> decoder_ids) const;
    numerics::Tensor forward(std::span<const std::size_t> context_ids,
                             std::span<const std::size_t> decoder_ids) const;

    /// Teacher-forced decoder input: PAD followed by all but the last target token.
    std::vector<std::size_t> teacher_forcing_inputs(std::span<const std::size_t> target_ids) const;

    /// Token cross-entropy of the horizon given the context (horizon binned with the context scale).
    numerics::Tensor window_loss(std::span<const double> context, std::span<const double> horizon) const;

    const numerics::Tensor& token_embedding() const { return token_embedding_; }
    const numerics::Tensor& head_bias() const { return head_bias_; }

private:
    friend class IncrementalDecoder;

    explicit ForecastModel(ModelConfig cfg);
    void bind();
    numerics::Tensor logits(const numerics::Tensor& hidden) const;

    ModelConfig cfg_;
    ParameterRegistry registry_;
    numerics::Tensor token_embedding_;
    numerics::Tensor encoder_positions_;
    numerics::Tensor decoder_positions_;
    std::vector<EncoderLayer> encoder_;
    LayerNorm encoder_final_;
    std::vector<DecoderLayer> decoder_;
    LayerNorm decoder_final_;
    numerics::Tensor head_bias_;
};

/// Step-by-step decoding for several independent streams sharing one encoder memory.
/// Keys/values of earlier steps are cached; results equal the full decode() pass.
class IncrementalDecoder {
public:
    IncrementalDecoder(const ForecastModel& model, const numerics::Tensor& memory, std::size_t streams);

    /// Feeds one token per stream at the next position; returns logits [streams x vocab].
    numerics::Tensor step(std::span<const std::size_t> tokens);
    std::size_t position() const { return position_; }

private:
    const ForecastModel& model_;
    std::size_t streams_;
    std::size_t position_ = 0;
    std::vector<numerics::Tensor> cross_keys_, cross_values_;
    std::vector<std::vector<double>> self_keys_, self_values_;  // [stream][pos][d] per layer
};

}  // namespace vitalpeft::model
