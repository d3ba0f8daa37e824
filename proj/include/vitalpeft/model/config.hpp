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

namespace vitalpeft::model {

/// Mean-scaling + uniform binning vocabulary. Bin tokens occupy ids [0, n_bins);
/// PAD and EOS follow.
struct TokenizerConfig {
    std::size_t n_bins = 128;
    double bin_low = -10.0;
    double bin_high = 10.0;

    static constexpr std::size_t kSpecialTokens = 2;

    std::size_t pad_id() const { return n_bins; }
    std::size_t eos_id() const { return n_bins + 1; }
    std::size_t vocab_size() const { return n_bins + kSpecialTokens; }
    double bin_width() const { return (bin_high - bin_low) / static_cast<double>(n_bins); }

    void validate() const;

    bool operator==(const TokenizerConfig&) const = default;
};

struct ModelConfig {
    std::string preset = "desk";
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_encoder_layers = 2;
    std::size_t n_decoder_layers = 2;
    std::size_t d_ff = 512;
    TokenizerConfig tokenizer{};
    bool include_linear_bias = true;
    std::size_t context_len = 72;
    std::size_t horizon_len = 36;

    std::size_t vocab_size() const { return tokenizer.vocab_size(); }
    /// Attention blocks carrying Q/K/V/O: encoder self, decoder self, decoder cross.
    std::size_t attention_blocks() const { return n_encoder_layers + 2 * n_decoder_layers; }

    void validate() const;

    /// Flat `key = value` text, one per line; parse(to_text()) round-trips.
    std::string to_text() const;
    static ModelConfig parse(const std::string& text);

    /// desk, mini, tiny, small, base, large.
    static ModelConfig preset_config(const std::string& name);
    static std::vector<std::string> preset_names();

    bool operator==(const ModelConfig&) const = default;
};

}  // namespace vitalpeft::model
