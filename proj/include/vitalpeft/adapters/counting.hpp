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
#include <string>
#include <vector>

#include "vitalpeft/adapters/adapter.hpp"
#include "vitalpeft/model/config.hpp"

namespace vitalpeft::adapters {

struct BudgetGroup {
    std::string name;
    std::size_t count = 0;
};

struct ParameterBudgetReport {
    Method method = Method::ZeroShot;
    std::string preset;
    std::size_t total = 0;
    std::vector<BudgetGroup> groups;  // sums to total
    std::size_t full_ft_total = 0;    // every base parameter of the same model

    double fraction_of_full_ft() const;
};

/// Closed-form trainable-parameter count for one method on one model shape.
ParameterBudgetReport count_trainable_params(const AdapterConfig& cfg, const model::ModelConfig& mcfg);

/// The same count taken from the parameter layout and adapter shapes, without
/// allocating a model. Equals what attach() would leave trainable.
std::size_t layout_trainable_count(const AdapterConfig& cfg, const model::ModelConfig& mcfg);

/// Count in millions with `significant` significant digits, trailing zeros trimmed
/// ("0.0024", "0.442", "8.45").
std::string format_millions(std::size_t count, int significant = 3);

/// Count in millions rounded half-away-from-zero to `decimals` places.
std::string round_millions(std::size_t count, int decimals);

}  // namespace vitalpeft::adapters
