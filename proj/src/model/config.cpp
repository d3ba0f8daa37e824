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

#include "vitalpeft/model/config.hpp"

#include <map>
#include <sstream>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/text_format.hpp"

namespace vitalpeft::model {

void TokenizerConfig::validate() const {
    if (n_bins < 2) throw ConfigError("tokenizer needs at least 2 bins, got " + std::to_string(n_bins));
    if (!(bin_low < bin_high)) throw ConfigError("tokenizer bin_low must be below bin_high");
}

void ModelConfig::validate() const {
    tokenizer.validate();
    if (d_model == 0 || n_heads == 0) throw ConfigError("d_model and n_heads must be positive");
    if (d_model % n_heads != 0) {
        throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by n_heads " +
                          std::to_string(n_heads));
    }
    if (n_encoder_layers == 0 || n_decoder_layers == 0) throw ConfigError("model needs encoder and decoder layers");
    if (d_ff == 0) throw ConfigError("d_ff must be positive");
    if (context_len == 0 || horizon_len == 0) throw ConfigError("context_len and horizon_len must be positive");
}

std::string ModelConfig::to_text() const {
    std::ostringstream os;
    os << "preset = " << preset << '\n'
       << "d_model = " << d_model << '\n'
       << "n_heads = " << n_heads << '\n'
       << "n_encoder_layers = " << n_encoder_layers << '\n'
       << "n_decoder_layers = " << n_decoder_layers << '\n'
       << "d_ff = " << d_ff << '\n'
       << "n_bins = " << tokenizer.n_bins << '\n'
       << "bin_low = " << format_double(tokenizer.bin_low) << '\n'
       << "bin_high = " << format_double(tokenizer.bin_high) << '\n'
       << "include_linear_bias = " << (include_linear_bias ? "true" : "false") << '\n'
       << "context_len = " << context_len << '\n'
       << "horizon_len = " << horizon_len << '\n';
    return os.str();
}

ModelConfig ModelConfig::parse(const std::string& text) {
    const auto kv = parse_key_values(text);
    ModelConfig cfg;
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError("model config is missing key '" + key + "'");
        return it->second;
    };
    cfg.preset = get("preset");
    cfg.d_model = parse_size(get("d_model"), "d_model");
    cfg.n_heads = parse_size(get("n_heads"), "n_heads");
    cfg.n_encoder_layers = parse_size(get("n_encoder_layers"), "n_encoder_layers");
    cfg.n_decoder_layers = parse_size(get("n_decoder_layers"), "n_decoder_layers");
    cfg.d_ff = parse_size(get("d_ff"), "d_ff");
    cfg.tokenizer.n_bins = parse_size(get("n_bins"), "n_bins");
    cfg.tokenizer.bin_low = parse_real(get("bin_low"), "bin_low");
    cfg.tokenizer.bin_high = parse_real(get("bin_high"), "bin_high");
    cfg.include_linear_bias = parse_bool(get("include_linear_bias"), "include_linear_bias");
    cfg.context_len = parse_size(get("context_len"), "context_len");
    cfg.horizon_len = parse_size(get("horizon_len"), "horizon_len");
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::preset_config(const std::string& name) {
    // Full-size presets follow the public T5-efficient shapes behind the Chronos family
    // (4096-token vocabulary); `desk` is the trainable-on-a-laptop configuration.
    struct Dims {
        std::size_t d_model, heads, enc, dec, d_ff, bins;
    };
    static const std::map<std::string, Dims> table = {
        {"desk", {64, 4, 2, 2, 512, 128}},
        {"mini", {384, 8, 4, 4, 1536, 4094}},
        {"tiny", {256, 4, 4, 4, 1024, 4094}},
        {"small", {512, 8, 6, 6, 2048, 4094}},
        {"base", {768, 12, 12, 12, 3072, 4094}},
        {"large", {1024, 16, 24, 24, 4096, 4094}},
    };
    auto it = table.find(name);
    if (it == table.end()) throw ConfigError("unknown model preset '" + name + "'");
    ModelConfig cfg;
    cfg.preset = name;
    cfg.d_model = it->second.d_model;
    cfg.n_heads = it->second.heads;
    cfg.n_encoder_layers = it->second.enc;
    cfg.n_decoder_layers = it->second.dec;
    cfg.d_ff = it->second.d_ff;
    cfg.tokenizer.n_bins = it->second.bins;
    if (name != "desk") {
        cfg.tokenizer.bin_low = -15.0;
        cfg.tokenizer.bin_high = 15.0;
    }
    return cfg;
}

std::vector<std::string> ModelConfig::preset_names() {
    return {"desk", "mini", "tiny", "small", "base", "large"};
}

}  // namespace vitalpeft::model
