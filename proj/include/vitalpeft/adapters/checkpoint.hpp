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

#include <filesystem>
#include <iosfwd>

#include "vitalpeft/adapters/adapter.hpp"
#include "vitalpeft/model/transformer.hpp"

namespace vitalpeft::adapters {

// Adapter file layout (independent of the base weights):
//   "VPADAPT\0"                      8-byte magic
//   u32 version (=1)
//   str adapter config               AdapterConfig::to_text()
//   str model config                 ModelConfig::to_text() of the base it was trained on
//   u64 shared_seed
//   u64 learnable blocks, then tensor blocks (adapter-created tensors)
//   u64 base blocks, then tensor blocks (trainable base parameters, selective/full methods)
inline constexpr std::uint32_t kAdapterFormatVersion = 1;

void save_adapter(const model::ForecastModel& model, const AdapterState& state, std::ostream& out);
void save_adapter(const model::ForecastModel& model, const AdapterState& state, const std::filesystem::path& path);

/// Attaches the stored adapter to `model` and restores its trained values.
/// FormatError if the file was written for a different model shape.
AdapterState load_adapter(model::ForecastModel& model, std::istream& in);
AdapterState load_adapter(model::ForecastModel& model, const std::filesystem::path& path);

}  // namespace vitalpeft::adapters
