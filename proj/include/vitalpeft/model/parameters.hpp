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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vitalpeft/model/config.hpp"
#include "vitalpeft/numerics/tensor.hpp"

namespace vitalpeft::model {

enum class ParamClass { AttentionProjection, Bias, LayerNorm, Embedding, Head, Other };
enum class Projection { Q, K, V, O };
enum class NormSite { None, Attention, FeedForward, Final };

std::string_view to_string(ParamClass c);
std::string_view to_string(Projection p);
std::optional<Projection> parse_projection(std::string_view s);

/// How a registered parameter is classified for selective fine-tuning.
struct ParamInfo {
    ParamClass cls = ParamClass::Other;
    std::optional<Projection> projection;  // set for Q/K/V/O weights and their biases
    bool is_bias = false;                  // additive offset (linear, layer-norm or head bias)
    NormSite norm_site = NormSite::None;   // set for layer-norm scale and bias

    bool operator==(const ParamInfo&) const = default;
};

struct ParamSpec {
    std::string name;
    numerics::Shape shape;
    ParamInfo info;
};

/// One attention block whose Q/K/V/O projections may carry an adapter.
struct AttentionSite {
    std::string prefix;  // e.g. "decoder.layers.1.cross_attn"
};

/// Every parameter a model with this config owns, in registry order.
std::vector<ParamSpec> parameter_layout(const ModelConfig& cfg);

std::vector<AttentionSite> attention_sites(const ModelConfig& cfg);

/// "<site>.<q|k|v|o>", the identifier adapters use for one projection.
std::string projection_target(const AttentionSite& site, Projection p);

struct RegisteredParameter {
    std::string name;
    numerics::Tensor tensor;
    ParamInfo info;
};

/// Ordered name -> parameter map with stable, unique names.
class ParameterRegistry {
public:
    void add(std::string name, numerics::Tensor tensor, ParamInfo info);

    const RegisteredParameter& at(const std::string& name) const;
    RegisteredParameter& at(const std::string& name);
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    auto begin() { return entries_.begin(); }
    auto end() { return entries_.end(); }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }
    std::size_t size() const { return entries_.size(); }

    std::size_t total_numel() const;
    std::size_t trainable_numel() const;
    void set_all_trainable(bool flag);

private:
    std::vector<RegisteredParameter> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace vitalpeft::model
