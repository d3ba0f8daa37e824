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

#include "vitalpeft/model/parameters.hpp"

#include "vitalpeft/errors.hpp"

namespace vitalpeft::model {

std::string_view to_string(ParamClass c) {
    switch (c) {
        case ParamClass::AttentionProjection: return "attention_projection";
        case ParamClass::Bias: return "bias";
        case ParamClass::LayerNorm: return "layer_norm";
        case ParamClass::Embedding: return "embedding";
        case ParamClass::Head: return "head";
        case ParamClass::Other: return "other";
    }
    return "other";
}

std::string_view to_string(Projection p) {
    switch (p) {
        case Projection::Q: return "q";
        case Projection::K: return "k";
        case Projection::V: return "v";
        case Projection::O: return "o";
    }
    return "q";
}

std::optional<Projection> parse_projection(std::string_view s) {
    if (s == "q" || s == "Q") return Projection::Q;
    if (s == "k" || s == "K") return Projection::K;
    if (s == "v" || s == "V") return Projection::V;
    if (s == "o" || s == "O") return Projection::O;
    return std::nullopt;
}

std::vector<AttentionSite> attention_sites(const ModelConfig& cfg) {
    std::vector<AttentionSite> sites;
    for (std::size_t i = 0; i < cfg.n_encoder_layers; ++i)
        sites.push_back({"encoder.layers." + std::to_string(i) + ".self_attn"});
    for (std::size_t i = 0; i < cfg.n_decoder_layers; ++i) {
        sites.push_back({"decoder.layers." + std::to_string(i) + ".self_attn"});
        sites.push_back({"decoder.layers." + std::to_string(i) + ".cross_attn"});
    }
    return sites;
}

std::string projection_target(const AttentionSite& site, Projection p) {
    return site.prefix + "." + std::string(to_string(p));
}

namespace {

class LayoutBuilder {
public:
    explicit LayoutBuilder(const ModelConfig& cfg) : cfg_(cfg) {}

    void add(std::string name, numerics::Shape shape, ParamInfo info) {
        specs_.push_back({std::move(name), std::move(shape), info});
    }

    void norm(const std::string& prefix, NormSite site) {
        add(prefix + ".scale", {cfg_.d_model}, {ParamClass::LayerNorm, std::nullopt, false, site});
        add(prefix + ".bias", {cfg_.d_model}, {ParamClass::LayerNorm, std::nullopt, true, site});
    }

    void attention(const std::string& prefix) {
        for (auto p : {Projection::Q, Projection::K, Projection::V, Projection::O}) {
            const std::string base = prefix + "." + std::string(to_string(p));
            add(base + ".weight", {cfg_.d_model, cfg_.d_model}, {ParamClass::AttentionProjection, p, false, NormSite::None});
            if (cfg_.include_linear_bias)
                add(base + ".bias", {cfg_.d_model}, {ParamClass::Bias, p, true, NormSite::None});
        }
    }

    void feed_forward(const std::string& prefix) {
        add(prefix + ".wi.weight", {cfg_.d_ff, cfg_.d_model}, {});
        if (cfg_.include_linear_bias) add(prefix + ".wi.bias", {cfg_.d_ff}, {ParamClass::Bias, std::nullopt, true, NormSite::None});
        add(prefix + ".wo.weight", {cfg_.d_model, cfg_.d_ff}, {});
        if (cfg_.include_linear_bias) add(prefix + ".wo.bias", {cfg_.d_model}, {ParamClass::Bias, std::nullopt, true, NormSite::None});
    }

    std::vector<ParamSpec> take() { return std::move(specs_); }

private:
    const ModelConfig& cfg_;
    std::vector<ParamSpec> specs_;
};

}  // namespace

std::vector<ParamSpec> parameter_layout(const ModelConfig& cfg) {
    cfg.validate();
    LayoutBuilder b(cfg);
    const ParamInfo emb{ParamClass::Embedding, std::nullopt, false, NormSite::None};
    b.add("shared.token_embedding", {cfg.vocab_size(), cfg.d_model}, emb);
    b.add("encoder.position_embedding", {cfg.context_len, cfg.d_model}, emb);
    b.add("decoder.position_embedding", {cfg.horizon_len, cfg.d_model}, emb);
    for (std::size_t i = 0; i < cfg.n_encoder_layers; ++i) {
        const std::string p = "encoder.layers." + std::to_string(i);
        b.norm(p + ".self_attn_norm", NormSite::Attention);
        b.attention(p + ".self_attn");
        b.norm(p + ".ff_norm", NormSite::FeedForward);
        b.feed_forward(p + ".ff");
    }
    b.norm("encoder.final_norm", NormSite::Final);
    for (std::size_t i = 0; i < cfg.n_decoder_layers; ++i) {
        const std::string p = "decoder.layers." + std::to_string(i);
        b.norm(p + ".self_attn_norm", NormSite::Attention);
        b.attention(p + ".self_attn");
        b.norm(p + ".cross_attn_norm", NormSite::Attention);
        b.attention(p + ".cross_attn");
        b.norm(p + ".ff_norm", NormSite::FeedForward);
        b.feed_forward(p + ".ff");
    }
    b.norm("decoder.final_norm", NormSite::Final);
    // Output projection is tied to the token embedding; only its bias is separate.
    if (cfg.include_linear_bias)
        b.add("head.bias", {cfg.vocab_size()}, {ParamClass::Head, std::nullopt, true, NormSite::None});
    return b.take();
}

void ParameterRegistry::add(std::string name, numerics::Tensor tensor, ParamInfo info) {
    if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.push_back({std::move(name), std::move(tensor), info});
}

const RegisteredParameter& ParameterRegistry::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw IndexError("no parameter named '" + name + "'");
    return entries_[it->second];
}

RegisteredParameter& ParameterRegistry::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw IndexError("no parameter named '" + name + "'");
    return entries_[it->second];
}

std::size_t ParameterRegistry::total_numel() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.tensor.numel();
    return n;
}

std::size_t ParameterRegistry::trainable_numel() const {
    std::size_t n = 0;
    for (const auto& e : entries_)
        if (e.tensor.requires_grad()) n += e.tensor.numel();
    return n;
}

void ParameterRegistry::set_all_trainable(bool flag) {
    for (auto& e : entries_) e.tensor.set_requires_grad(flag);
}

}  // namespace vitalpeft::model
