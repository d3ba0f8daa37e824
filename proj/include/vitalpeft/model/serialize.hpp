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
#include <string>
#include <utility>

#include "vitalpeft/binary_io.hpp"
#include "vitalpeft/model/transformer.hpp"

namespace vitalpeft::model {

// Model file layout (all integers little-endian):
//   "VPMODEL\0"                      8-byte magic
//   u32 version (=1)
//   str header                       ModelConfig::to_text()
//   u64 block count, then per block:
//     str name, u32 rank, u64 dims[rank], f64 values[prod(dims)]
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_tensor_block(BinaryWriter& w, const std::string& name, const numerics::Tensor& t);
std::pair<std::string, numerics::Tensor> read_tensor_block(BinaryReader& r);

void save_model(const ForecastModel& model, std::ostream& out);
ForecastModel load_model(std::istream& in);
void save_model(const ForecastModel& model, const std::filesystem::path& path);
ForecastModel load_model(const std::filesystem::path& path);

}  // namespace vitalpeft::model
