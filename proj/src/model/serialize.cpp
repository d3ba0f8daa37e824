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

#include "vitalpeft/model/serialize.hpp"

#include <fstream>

#include "vitalpeft/errors.hpp"

namespace vitalpeft::model {

namespace {
const std::string kMagic("VPMODEL\0", 8);
}

void write_tensor_block(BinaryWriter& w, const std::string& name, const numerics::Tensor& t) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u64(d);
    w.f64s(t.data());
}

std::pair<std::string, numerics::Tensor> read_tensor_block(BinaryReader& r) {
    std::string name = r.str(4096);
    const auto rank = r.u32();
    if (rank > 8) throw FormatError("tensor '" + name + "' has implausible rank " + std::to_string(rank));
    numerics::Shape shape(rank);
    for (auto& d : shape) d = r.u64();
    const auto n = numerics::shape_numel(shape);
    if (n > (std::size_t{1} << 34)) throw FormatError("tensor '" + name + "' is implausibly large");
    std::vector<double> values(n);
    r.f64s(values);
    return {std::move(name), numerics::Tensor(std::move(shape), std::move(values))};
}

void save_model(const ForecastModel& model, std::ostream& out) {
    BinaryWriter w(out);
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kModelFormatVersion);
    w.str(model.config().to_text());
    w.u64(model.parameters().size());
    for (const auto& p : model.parameters()) write_tensor_block(w, p.name, p.tensor);
}

ForecastModel load_model(std::istream& in) {
    BinaryReader r(in);
    r.expect_magic(kMagic);
    const auto version = r.u32();
    if (version != kModelFormatVersion) throw FormatError("unsupported model format version " + std::to_string(version));
    const auto cfg = ModelConfig::parse(r.str());
    numerics::Rng unused(0);
    ForecastModel model(cfg, unused);
    const auto blocks = r.u64();
    if (blocks != model.parameters().size()) {
        throw FormatError("model file has " + std::to_string(blocks) + " parameter blocks, config implies " +
                          std::to_string(model.parameters().size()));
    }
    for (std::uint64_t i = 0; i < blocks; ++i) {
        auto [name, tensor] = read_tensor_block(r);
        auto& dst = model.parameters().at(name).tensor;
        if (dst.shape() != tensor.shape()) {
            throw FormatError("parameter '" + name + "' has shape " + numerics::shape_to_string(tensor.shape()) +
                              ", expected " + numerics::shape_to_string(dst.shape()));
        }
        std::copy(tensor.data().begin(), tensor.data().end(), dst.data().begin());
    }
    return model;
}

void save_model(const ForecastModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    save_model(model, out);
}

ForecastModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return load_model(in);
}

}  // namespace vitalpeft::model
