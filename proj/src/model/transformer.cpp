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

#include "vitalpeft/model/transformer.hpp"

#include <cmath>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/model/tokenizer.hpp"
#include "vitalpeft/numerics/kernels.hpp"
#include "vitalpeft/numerics/ops.hpp"

namespace vitalpeft::model {

using numerics::Tensor;
namespace ops = numerics;

namespace {
constexpr double kNormEps = 1e-5;
}

Tensor Linear::forward(const Tensor& x) const {
    Tensor y = ops::matmul_nt(x, weight);
    if (bias.defined()) y = ops::add_row(y, bias);
    if (delta) y = ops::add(y, delta->apply(x));
    return y;
}

Tensor LayerNorm::forward(const Tensor& x) const { return ops::layer_norm(x, scale, bias, kNormEps); }

Linear& AttentionProjections::get(Projection p) {
    switch (p) {
        case Projection::Q: return q;
        case Projection::K: return k;
        case Projection::V: return v;
        case Projection::O: return o;
    }
    return q;
}

Tensor FeedForward::forward(const Tensor& x) const { return wo.forward(ops::relu(wi.forward(x))); }

ForecastModel::ForecastModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    for (auto& spec : parameter_layout(cfg_)) {
        registry_.add(spec.name, Tensor(spec.shape, 0.0, true), spec.info);
    }
    bind();
}

ForecastModel::ForecastModel(ModelConfig cfg, numerics::Rng& rng) : ForecastModel(std::move(cfg)) {
    const double emb_std = 1.0 / std::sqrt(static_cast<double>(cfg_.d_model));
    for (auto& p : registry_) {
        auto data = p.tensor.data();
        if (p.info.cls == ParamClass::Embedding) {
            const double s = p.name == "shared.token_embedding" ? emb_std : 0.5 * emb_std;
            for (auto& v : data) v = rng.normal(0.0, s);
        } else if (p.info.cls == ParamClass::LayerNorm) {
            const double fill = p.info.is_bias ? 0.0 : 1.0;
            for (auto& v : data) v = fill;
        } else if (p.tensor.rank() == 2) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(p.tensor.cols()));
            for (auto& v : data) v = rng.uniform(-bound, bound);
        }
        // Remaining vectors are linear/head biases and start at zero.
    }
}

void ForecastModel::bind() {
    auto t = [&](const std::string& name) { return registry_.at(name).tensor; };
    auto opt = [&](const std::string& name) { return registry_.contains(name) ? registry_.at(name).tensor : Tensor(); };
    auto norm = [&](const std::string& p) { return LayerNorm{t(p + ".scale"), t(p + ".bias")}; };
    auto linear = [&](const std::string& p) { return Linear{t(p + ".weight"), opt(p + ".bias"), nullptr}; };
    auto attn = [&](const std::string& p) {
        return AttentionProjections{linear(p + ".q"), linear(p + ".k"), linear(p + ".v"), linear(p + ".o")};
    };
    auto ff = [&](const std::string& p) { return FeedForward{linear(p + ".wi"), linear(p + ".wo")}; };

    token_embedding_ = t("shared.token_embedding");
    encoder_positions_ = t("encoder.position_embedding");
    decoder_positions_ = t("decoder.position_embedding");
    encoder_.clear();
    decoder_.clear();
    for (std::size_t i = 0; i < cfg_.n_encoder_layers; ++i) {
        const std::string p = "encoder.layers." + std::to_string(i);
        encoder_.push_back({norm(p + ".self_attn_norm"), attn(p + ".self_attn"), norm(p + ".ff_norm"), ff(p + ".ff")});
    }
    encoder_final_ = norm("encoder.final_norm");
    for (std::size_t i = 0; i < cfg_.n_decoder_layers; ++i) {
        const std::string p = "decoder.layers." + std::to_string(i);
        decoder_.push_back({norm(p + ".self_attn_norm"), attn(p + ".self_attn"), norm(p + ".cross_attn_norm"),
                            attn(p + ".cross_attn"), norm(p + ".ff_norm"), ff(p + ".ff")});
    }
    decoder_final_ = norm("decoder.final_norm");
    head_bias_ = opt("head.bias");
}

ForecastModel ForecastModel::clone() const {
    ForecastModel copy(cfg_);
    for (const auto& p : registry_) {
        auto& dst = copy.registry_.at(p.name).tensor;
        std::copy(p.tensor.data().begin(), p.tensor.data().end(), dst.data().begin());
        dst.set_requires_grad(p.tensor.requires_grad());
    }
    return copy;
}

Linear& ForecastModel::projection(const std::string& target) {
    const auto dot = target.rfind('.');
    if (dot == std::string::npos) throw IndexError("malformed projection target '" + target + "'");
    const auto proj = parse_projection(std::string_view(target).substr(dot + 1));
    const std::string site = target.substr(0, dot);
    if (proj) {
        for (std::size_t i = 0; i < encoder_.size(); ++i)
            if (site == "encoder.layers." + std::to_string(i) + ".self_attn") return encoder_[i].self_attn.get(*proj);
        for (std::size_t i = 0; i < decoder_.size(); ++i) {
            const std::string p = "decoder.layers." + std::to_string(i);
            if (site == p + ".self_attn") return decoder_[i].self_attn.get(*proj);
            if (site == p + ".cross_attn") return decoder_[i].cross_attn.get(*proj);
        }
    }
    throw IndexError("no attention projection named '" + target + "'");
}

std::vector<std::string> ForecastModel::projection_targets() const {
    std::vector<std::string> out;
    for (const auto& site : attention_sites(cfg_))
        for (auto p : {Projection::Q, Projection::K, Projection::V, Projection::O}) out.push_back(projection_target(site, p));
    return out;
}

namespace {

Tensor self_attention(const AttentionProjections& a, const Tensor& x, std::size_t heads, bool causal) {
    return a.o.forward(ops::attention(a.q.forward(x), a.k.forward(x), a.v.forward(x), heads, causal));
}

Tensor cross_attention(const AttentionProjections& a, const Tensor& x, const Tensor& memory, std::size_t heads) {
    return a.o.forward(ops::attention(a.q.forward(x), a.k.forward(memory), a.v.forward(memory), heads, false));
}

}  // namespace

Tensor ForecastModel::encode(std::span<const std::size_t> context_ids) const {
    if (context_ids.empty() || context_ids.size() > cfg_.context_len) {
        throw DimensionError("context length " + std::to_string(context_ids.size()) + " outside [1, " +
                             std::to_string(cfg_.context_len) + "]");
    }
    Tensor x = ops::add(ops::embedding(token_embedding_, context_ids),
                        ops::slice_rows(encoder_positions_, 0, context_ids.size()));
    for (const auto& layer : encoder_) {
        x = ops::add(x, self_attention(layer.self_attn, layer.self_attn_norm.forward(x), cfg_.n_heads, false));
        x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
    }
    return encoder_final_.forward(x);
}

Tensor ForecastModel::logits(const Tensor& hidden) const {
    Tensor out = ops::matmul_nt(decoder_final_.forward(hidden), token_embedding_);
    if (head_bias_.defined()) out = ops::add_row(out, head_bias_);
    return out;
}

Tensor ForecastModel::decode(const Tensor& memory, std::span<const std::size_t> decoder_ids) const {
    if (decoder_ids.empty() || decoder_ids.size() > cfg_.horizon_len) {
        throw DimensionError("decoder length " + std::to_string(decoder_ids.size()) + " outside [1, " +
                             std::to_string(cfg_.horizon_len) + "]");
    }
    Tensor x = ops::add(ops::embedding(token_embedding_, decoder_ids),
                        ops::slice_rows(decoder_positions_, 0, decoder_ids.size()));
    for (const auto& layer : decoder_) {
        x = ops::add(x, self_attention(layer.self_attn, layer.self_attn_norm.forward(x), cfg_.n_heads, true));
        x = ops::add(x, cross_attention(layer.cross_attn, layer.cross_attn_norm.forward(x), memory, cfg_.n_heads));
        x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
    }
    return logits(x);
}

Tensor ForecastModel::forward(std::span<const std::size_t> context_ids,
                              std::span<const std::size_t> decoder_ids) const {
    return decode(encode(context_ids), decoder_ids);
}

std::vector<std::size_t> ForecastModel::teacher_forcing_inputs(std::span<const std::size_t> target_ids) const {
    std::vector<std::size_t> in;
    in.reserve(target_ids.size());
    in.push_back(cfg_.tokenizer.pad_id());
    for (std::size_t i = 0; i + 1 < target_ids.size(); ++i) in.push_back(target_ids[i]);
    return in;
}

Tensor ForecastModel::window_loss(std::span<const double> context, std::span<const double> horizon) const {
    if (context.size() != cfg_.context_len || horizon.size() != cfg_.horizon_len) {
        throw DimensionError("window must be " + std::to_string(cfg_.context_len) + "/" +
                             std::to_string(cfg_.horizon_len) + " steps, got " + std::to_string(context.size()) +
                             "/" + std::to_string(horizon.size()));
    }
    const auto ctx = tokenize(context, cfg_.tokenizer);
    const auto targets = encode_with_scale(horizon, ctx.scale, cfg_.tokenizer);
    const auto inputs = teacher_forcing_inputs(targets);
    return ops::softmax_cross_entropy(forward(ctx.ids, inputs), targets);
}

IncrementalDecoder::IncrementalDecoder(const ForecastModel& model, const Tensor& memory, std::size_t streams)
    : model_(model), streams_(streams) {
    const auto& cfg = model.cfg_;
    for (const auto& layer : model.decoder_) {
        cross_keys_.push_back(layer.cross_attn.k.forward(memory));
        cross_values_.push_back(layer.cross_attn.v.forward(memory));
        self_keys_.emplace_back(streams * cfg.horizon_len * cfg.d_model, 0.0);
        self_values_.emplace_back(streams * cfg.horizon_len * cfg.d_model, 0.0);
    }
}

Tensor IncrementalDecoder::step(std::span<const std::size_t> tokens) {
    const auto& cfg = model_.cfg_;
    const std::size_t d = cfg.d_model;
    if (tokens.size() != streams_) throw DimensionError("expected one token per stream");
    if (position_ >= cfg.horizon_len) throw ContractError("decoder is already at the horizon length");

    Tensor x = ops::add_row(ops::embedding(model_.token_embedding_, tokens),
                            ops::slice_rows(model_.decoder_positions_, position_, position_ + 1));
    const std::size_t seen = position_ + 1;
    const std::size_t stride = cfg.horizon_len * d;
    for (std::size_t li = 0; li < model_.decoder_.size(); ++li) {
        const auto& layer = model_.decoder_[li];
        const Tensor h = layer.self_attn_norm.forward(x);
        const Tensor q = layer.self_attn.q.forward(h);
        const Tensor k = layer.self_attn.k.forward(h);
        const Tensor v = layer.self_attn.v.forward(h);
        std::vector<double> attn(streams_ * d);
        for (std::size_t s = 0; s < streams_; ++s) {
            double* kc = self_keys_[li].data() + s * stride;
            double* vc = self_values_[li].data() + s * stride;
            std::copy_n(k.ptr() + s * d, d, kc + position_ * d);
            std::copy_n(v.ptr() + s * d, d, vc + position_ * d);
            kernels::attention(1, seen, d, cfg.n_heads, q.ptr() + s * d, kc, vc, false, 0, attn.data() + s * d, nullptr);
        }
        x = ops::add(x, layer.self_attn.o.forward(Tensor({streams_, d}, std::move(attn))));
        const Tensor hc = layer.cross_attn_norm.forward(x);
        const Tensor qc = layer.cross_attn.q.forward(hc);
        x = ops::add(x, layer.cross_attn.o.forward(
                            ops::attention(qc, cross_keys_[li], cross_values_[li], cfg.n_heads, false)));
        x = ops::add(x, layer.ff.forward(layer.ff_norm.forward(x)));
    }
    ++position_;
    return model_.logits(x);
}

}  // namespace vitalpeft::model
