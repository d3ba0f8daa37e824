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

#include "vitalpeft/model/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/model/tokenizer.hpp"

namespace vitalpeft::model {

std::vector<double> per_step_median(std::span<const double> samples, std::size_t n_samples, std::size_t horizon) {
    if (n_samples == 0 || samples.size() != n_samples * horizon) {
        throw DimensionError("median needs a non-empty [n_samples x horizon] matrix");
    }
    std::vector<double> out(horizon);
    std::vector<double> column(n_samples);
    const std::size_t mid = (n_samples - 1) / 2;
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t s = 0; s < n_samples; ++s) column[s] = samples[s * horizon + t];
        std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid), column.end());
        out[t] = column[mid];
    }
    return out;
}

namespace {

std::size_t draw_bin(const double* logits, std::size_t n_bins, numerics::Rng& rng) {
    double mx = logits[0];
    for (std::size_t j = 1; j < n_bins; ++j) mx = std::max(mx, logits[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < n_bins; ++j) total += std::exp(logits[j] - mx);
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_bins; ++j) {
        acc += std::exp(logits[j] - mx);
        if (u < acc) return j;
    }
    // u landed in rounding slack at the top; return the last bin with non-zero mass.
    for (std::size_t j = n_bins; j-- > 0;)
        if (std::exp(logits[j] - mx) > 0.0) return j;
    return n_bins - 1;
}

}  // namespace

ForecastResult sample_forecast(const ForecastModel& model, std::span<const double> context,
                               std::size_t n_samples, const numerics::Rng& rng) {
    const auto& cfg = model.config();
    if (n_samples == 0) throw ContractError("sample_forecast needs at least one sample");
    if (context.size() != cfg.context_len) {
        throw DimensionError("context must have " + std::to_string(cfg.context_len) + " values, got " +
                             std::to_string(context.size()));
    }
    numerics::NoGradGuard no_grad;
    const auto ctx = tokenize(context, cfg.tokenizer);
    const auto memory = model.encode(ctx.ids);

    std::vector<numerics::Rng> streams;
    streams.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) streams.push_back(rng.child(s));

    const std::size_t horizon = cfg.horizon_len;
    const std::size_t vocab = cfg.vocab_size();
    std::vector<std::size_t> tokens(n_samples, cfg.tokenizer.pad_id());
    std::vector<std::size_t> drawn(n_samples * horizon);
    IncrementalDecoder decoder(model, memory, n_samples);
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto logits = decoder.step(tokens);
        for (std::size_t s = 0; s < n_samples; ++s) {
            tokens[s] = draw_bin(logits.ptr() + s * vocab, cfg.tokenizer.n_bins, streams[s]);
            drawn[s * horizon + t] = tokens[s];
        }
    }

    ForecastResult result;
    result.n_samples = n_samples;
    result.horizon = horizon;
    result.samples = detokenize(drawn, ctx.scale, cfg.tokenizer);
    result.point = per_step_median(result.samples, n_samples, horizon);
    return result;
}

}  // namespace vitalpeft::model
