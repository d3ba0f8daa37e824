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

#include "vitalpeft/adapters/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/model/serialize.hpp"

namespace vitalpeft::adapters {

namespace {

const std::string kMagic("VPADAPT\0", 8);

void copy_into(numerics::Tensor& dst, const numerics::Tensor& src, const std::string& name) {
    if (dst.shape() != src.shape()) {
        throw FormatError("adapter tensor '" + name + "' has shape " + numerics::shape_to_string(src.shape()) +
                          ", expected " + numerics::shape_to_string(dst.shape()));
    }
    std::copy(src.data().begin(), src.data().end(), dst.data().begin());
}

}  // namespace

void save_adapter(const model::ForecastModel& model, const AdapterState& state, std::ostream& out) {
    if (state.merged()) throw ContractError("cannot save a merged adapter; unmerge it first");
    BinaryWriter w(out);
    w.bytes(kMagic.data(), kMagic.size());
    w.u32(kAdapterFormatVersion);
    w.str(state.config().to_text());
    w.str(model.config().to_text());
    w.u64(state.config().shared_seed);
    w.u64(state.learnables().size());
    for (const auto& l : state.learnables()) model::write_tensor_block(w, l.name, l.tensor);
    std::vector<const model::RegisteredParameter*> base;
    for (const auto& p : model.parameters()) {
        if (selects_base_parameter(state.config(), p.name, p.info)) base.push_back(&p);
    }
    w.u64(base.size());
    for (const auto* p : base) model::write_tensor_block(w, p->name, p->tensor);
}

void save_adapter(const model::ForecastModel& model, const AdapterState& state, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    save_adapter(model, state, out);
}

AdapterState load_adapter(model::ForecastModel& model, std::istream& in) {
    BinaryReader r(in);
    r.expect_magic(kMagic);
    const auto version = r.u32();
    if (version != kAdapterFormatVersion) {
        throw FormatError("unsupported adapter format version " + std::to_string(version));
    }
    auto cfg = AdapterConfig::parse(r.str());
    const auto trained_on = model::ModelConfig::parse(r.str());
    if (!(trained_on == model.config())) {
        throw FormatError("adapter was trained on model preset '" + trained_on.preset +
                          "' with a different shape than the target model");
    }
    cfg.shared_seed = r.u64();

    numerics::Rng unused(0);
    auto state = attach(model, cfg, unused);
    std::map<std::string, numerics::Tensor> learnables;
    for (const auto& l : state.learnables()) learnables.emplace(l.name, l.tensor);

    const auto n_learnable = r.u64();
    if (n_learnable != learnables.size()) {
        throw FormatError("adapter file has " + std::to_string(n_learnable) + " learnable tensors, config implies " +
                          std::to_string(learnables.size()));
    }
    for (std::uint64_t i = 0; i < n_learnable; ++i) {
        auto [name, tensor] = model::read_tensor_block(r);
        auto it = learnables.find(name);
        if (it == learnables.end()) throw FormatError("adapter file has unknown tensor '" + name + "'");
        copy_into(it->second, tensor, name);
    }
    const auto n_base = r.u64();
    for (std::uint64_t i = 0; i < n_base; ++i) {
        auto [name, tensor] = model::read_tensor_block(r);
        if (!model.parameters().contains(name)) throw FormatError("adapter file has unknown parameter '" + name + "'");
        auto& p = model.parameters().at(name);
        if (!selects_base_parameter(cfg, p.name, p.info)) {
            throw FormatError("adapter file overrides parameter '" + name + "' that the method does not train");
        }
        copy_into(p.tensor, tensor, name);
    }
    return state;
}

AdapterState load_adapter(model::ForecastModel& model, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return load_adapter(model, in);
}

}  // namespace vitalpeft::adapters
