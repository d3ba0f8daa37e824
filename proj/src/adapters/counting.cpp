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

#include "vitalpeft/adapters/counting.hpp"

#include <cstdio>

#include "vitalpeft/model/parameters.hpp"

namespace vitalpeft::adapters {

namespace {

struct Shape {
    std::size_t d, ff, vocab, le, ld, blocks, norms;
    bool bias;
};

Shape shape_of(const model::ModelConfig& m) {
    return {m.d_model,
            m.d_ff,
            m.vocab_size(),
            m.n_encoder_layers,
            m.n_decoder_layers,
            m.attention_blocks(),
            2 * m.n_encoder_layers + 3 * m.n_decoder_layers + 2,
            m.include_linear_bias};
}

std::vector<BudgetGroup> full_groups(const Shape& s, const model::ModelConfig& m) {
    const std::size_t layers = s.le + s.ld;
    const std::size_t attn = s.blocks * 4 * (s.d * s.d + (s.bias ? s.d : 0));
    const std::size_t ff = layers * (2 * s.d * s.ff + (s.bias ? s.ff + s.d : 0));
    return {{"embeddings", s.vocab * s.d + (m.context_len + m.horizon_len) * s.d},
            {"attention", attn},
            {"feed_forward", ff},
            {"layer_norm", s.norms * 2 * s.d},
            {"head_bias", s.bias ? s.vocab : 0}};
}

std::size_t sum(const std::vector<BudgetGroup>& g) {
    std::size_t n = 0;
    for (const auto& x : g) n += x.count;
    return n;
}

}  // namespace

double ParameterBudgetReport::fraction_of_full_ft() const {
    return full_ft_total == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(full_ft_total);
}

ParameterBudgetReport count_trainable_params(const AdapterConfig& cfg, const model::ModelConfig& mcfg) {
    const auto s = shape_of(mcfg);
    ParameterBudgetReport r;
    r.method = cfg.method;
    r.preset = mcfg.preset;
    r.full_ft_total = sum(full_groups(s, mcfg));

    auto per_target = [&](std::size_t each) {
        for (auto p : cfg.targets) r.groups.push_back({std::string(model::to_string(p)), s.blocks * each});
    };
    switch (cfg.method) {
        case Method::ZeroShot: break;
        case Method::FullFT: r.groups = full_groups(s, mcfg); break;
        case Method::BitFit:
            if (cfg.bitfit_scope == BitFitScope::FinalNormOnly) {
                r.groups.push_back({"final_norm_bias", s.d});
            } else {
                if (s.bias) {
                    r.groups.push_back({"attention_bias", s.blocks * 4 * s.d});
                    r.groups.push_back({"feed_forward_bias", (s.le + s.ld) * (s.ff + s.d)});
                }
                r.groups.push_back({"layer_norm_bias", s.norms * s.d});
                if (s.bias) r.groups.push_back({"head_bias", s.vocab});
            }
            break;
        case Method::LNTuning:
            if (cfg.ln_scope == LnScope::Attention) {
                r.groups.push_back({"attention_norm", s.blocks * 2 * s.d});
            } else {
                r.groups.push_back({"attention_norm", s.blocks * 2 * s.d});
                r.groups.push_back({"feed_forward_norm", (s.le + s.ld) * 2 * s.d});
                r.groups.push_back({"final_norm", 2 * 2 * s.d});
            }
            break;
        case Method::LoRA: per_target(cfg.rank * (s.d + s.d)); break;
        case Method::VeRA: per_target(cfg.rank + s.d); break;
        case Method::FourierFT: per_target(cfg.n_coefficients); break;
    }
    r.total = sum(r.groups);
    return r;
}

std::size_t layout_trainable_count(const AdapterConfig& cfg, const model::ModelConfig& mcfg) {
    std::size_t n = 0;
    for (const auto& spec : model::parameter_layout(mcfg)) {
        if (selects_base_parameter(cfg, spec.name, spec.info)) n += numerics::shape_numel(spec.shape);
    }
    if (!is_additive(cfg.method)) return n;
    for (const auto& spec : model::parameter_layout(mcfg)) {
        if (spec.info.cls != model::ParamClass::AttentionProjection || !spec.info.projection) continue;
        if (!cfg.targets_projection(*spec.info.projection)) continue;
        const std::size_t d_out = spec.shape[0];
        const std::size_t d_in = spec.shape[1];
        switch (cfg.method) {
            case Method::LoRA: n += cfg.rank * d_in + d_out * cfg.rank; break;
            case Method::VeRA: n += cfg.rank + d_out; break;
            case Method::FourierFT: n += cfg.n_coefficients; break;
            default: break;
        }
    }
    return n;
}

std::string format_millions(std::size_t count, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", significant, static_cast<double>(count) / 1e6);
    std::string s(buf);
    if (s.find('e') != std::string::npos) {
        std::snprintf(buf, sizeof buf, "%.*f", 12, static_cast<double>(count) / 1e6);
        s = buf;
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
    }
    return s;
}

std::string round_millions(std::size_t count, int decimals) {
    if (decimals < 0 || decimals > 6) return format_millions(count);
    std::size_t divisor = 1;
    for (int i = decimals; i < 6; ++i) divisor *= 10;
    const std::size_t units = (count + divisor / 2) / divisor;
    std::string digits = std::to_string(units);
    if (decimals == 0) return digits;
    if (digits.size() <= static_cast<std::size_t>(decimals)) {
        digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
    }
    digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
    return digits;
}

}  // namespace vitalpeft::adapters
