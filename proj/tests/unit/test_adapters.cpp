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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "../support/gradcheck.hpp"
#include "../support/oracles.hpp"
#include "vitalpeft/adapters/adapter.hpp"
#include "vitalpeft/adapters/checkpoint.hpp"
#include "vitalpeft/adapters/counting.hpp"
#include "vitalpeft/adapters/spectral.hpp"
#include "vitalpeft/errors.hpp"
#include "vitalpeft/model/forecast.hpp"
#include "vitalpeft/numerics/ops.hpp"

using namespace vitalpeft;
using namespace vitalpeft::adapters;
using model::ForecastModel;
using model::ModelConfig;
using numerics::Rng;
using numerics::Tensor;

namespace {

std::vector<std::size_t> random_ids(std::size_t n, std::size_t vocab, Rng& rng) {
    std::vector<std::size_t> v(n);
    for (auto& x : v) x = rng.below(vocab);
    return v;
}

std::vector<double> random_series(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(0.2, 0.8);
    return v;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

void randomize_learnables(const AdapterState& state, Rng& rng, double scale) {
    for (const auto& l : state.learnables()) {
        auto t = l.tensor;
        for (auto& v : t.data()) v = rng.uniform(-scale, scale);
    }
}

Tensor logits(const ForecastModel& m, const std::vector<std::size_t>& ctx, const std::vector<std::size_t>& dec) {
    numerics::NoGradGuard guard;
    return m.forward(ctx, dec);
}

const std::vector<Method> kAdditive{Method::LoRA, Method::VeRA, Method::FourierFT};

}  // namespace

TEST_CASE("separable inverse DFT matches the naive double sum up to 8x8") {
    Rng rng(1);
    for (std::size_t rows = 1; rows <= 8; ++rows) {
        for (std::size_t cols = 1; cols <= 8; ++cols) {
            std::vector<std::complex<double>> s(rows * cols);
            std::vector<double> real_s(rows * cols);
            for (std::size_t i = 0; i < s.size(); ++i) {
                s[i] = {rng.normal(), rng.normal()};
                real_s[i] = rng.normal();
            }
            const auto fast = inverse_dft2(s, rows, cols);
            const auto slow = testing::naive_inverse_dft2(s, rows, cols);
            double err = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i) err = std::max(err, std::abs(fast[i] - slow[i]));
            CHECK(err < 1e-9);

            std::vector<std::complex<double>> as_complex(real_s.begin(), real_s.end());
            const auto fast_real = inverse_dft2_real(real_s, rows, cols);
            const auto slow_real = testing::naive_inverse_dft2(as_complex, rows, cols);
            double err_real = 0.0;
            for (std::size_t i = 0; i < s.size(); ++i)
                err_real = std::max(err_real, std::abs(fast_real[i] - slow_real[i].real()));
            CHECK(err_real < 1e-9);
        }
    }
}

TEST_CASE("single DC coefficient gives a constant update") {
    auto entries = std::make_shared<const std::vector<SpectralEntry>>(std::vector<SpectralEntry>{{0, 0}});
    Tensor c({1}, std::vector<double>{1.0});
    const auto dw = fourier_delta(c, entries, 4, 4, 1.0);
    for (double v : dw.data()) CHECK(v == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
    CHECK_THROWS_AS(fourier_delta(Tensor({2}), entries, 4, 4, 1.0), DimensionError);
}

TEST_CASE("spectral update gradient passes the finite-difference check") {
    Rng rng(2);
    auto entries = std::make_shared<const std::vector<SpectralEntry>>(sample_spectral_entries(5, 7, 9, rng));
    Tensor c({9}, 0.0, true);
    for (auto& v : c.data()) v = rng.normal();
    Tensor weights({5, 7});
    for (auto& v : weights.data()) v = rng.normal();
    auto r = testing::gradcheck(
        [&] { return numerics::sum(numerics::mul(fourier_delta(c, entries, 5, 7, 3.0), weights)); }, {c});
    CHECK(r.max_rel_error < 1e-6);
}

TEST_CASE("spectral entries are distinct, in range and reproducible") {
    Rng a(3), b(3);
    const auto e1 = sample_spectral_entries(16, 12, 50, a);
    const auto e2 = sample_spectral_entries(16, 12, 50, b);
    CHECK(e1 == e2);
    std::set<SpectralEntry> unique(e1.begin(), e1.end());
    CHECK(unique.size() == 50);
    for (const auto& e : e1) {
        CHECK(e.row < 16);
        CHECK(e.col < 12);
    }
    Rng c(4);
    CHECK(sample_spectral_entries(3, 3, 9, c).size() == 9);
    CHECK_THROWS_AS(sample_spectral_entries(3, 3, 10, c), ConfigError);
    CHECK_THROWS_AS(sample_spectral_entries(3, 3, 0, c), ConfigError);
}

TEST_CASE("additive adapters start as the identity mapping") {
    Rng rng(5);
    ForecastModel base(ModelConfig::preset_config("desk"), rng);
    const auto ctx = random_ids(72, 128, rng);
    const auto dec = random_ids(36, 128, rng);
    const auto reference = logits(base, ctx, dec);
    for (auto method : kAdditive) {
        CAPTURE(to_string(method));
        auto m = base.clone();
        Rng init(6);
        auto state = attach(m, AdapterConfig::for_method(method), init);
        CHECK(state.adapted_targets().size() == 24);
        CHECK(max_abs_diff(logits(m, ctx, dec), reference) <= 1e-12);
        for (const auto& t : state.adapted_targets()) {
            const auto dw = delta(state, t);
            for (double v : dw.data()) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("merge is equivalent to the adapter path and unmerge restores the base") {
    Rng rng(7);
    ForecastModel base(ModelConfig::preset_config("desk"), rng);
    const auto ctx = random_ids(72, 128, rng);
    const auto dec = random_ids(36, 128, rng);
    for (auto method : kAdditive) {
        CAPTURE(to_string(method));
        auto m = base.clone();
        Rng init(8);
        auto state = attach(m, AdapterConfig::for_method(method), init);

        // Merging at init leaves the weights untouched.
        merge(m, state);
        for (const auto& p : base.parameters()) CHECK(max_abs_diff(m.parameters().at(p.name).tensor, p.tensor) == 0.0);
        unmerge(m, state);

        const double scale = method == Method::FourierFT ? 1e-3 : 0.05;
        randomize_learnables(state, rng, scale);
        const auto adapted = logits(m, ctx, dec);
        CHECK(max_abs_diff(adapted, logits(base, ctx, dec)) > 1e-6);
        merge(m, state);
        CHECK(state.merged());
        CHECK(max_abs_diff(logits(m, ctx, dec), adapted) <= 1e-10);
        CHECK_THROWS_AS(merge(m, state), ContractError);
        unmerge(m, state);
        for (const auto& p : base.parameters())
            CHECK(max_abs_diff(m.parameters().at(p.name).tensor, p.tensor) <= 1e-12);
        CHECK(max_abs_diff(logits(m, ctx, dec), adapted) <= 1e-12);
    }
}

TEST_CASE("forecasts through merged weights equal the adapter path") {
    Rng rng(9);
    ForecastModel m(ModelConfig::preset_config("desk"), rng);
    Rng init(10);
    auto state = attach(m, AdapterConfig::for_method(Method::LoRA), init);
    randomize_learnables(state, rng, 0.05);
    const auto ctx = random_series(72, rng);
    const Rng sampler(11);
    const auto adapted = model::sample_forecast(m, ctx, 5, sampler);
    merge(m, state);
    const auto merged = model::sample_forecast(m, ctx, 5, sampler);
    double diff = 0.0;
    for (std::size_t i = 0; i < adapted.samples.size(); ++i)
        diff = std::max(diff, std::abs(adapted.samples[i] - merged.samples[i]));
    CHECK(diff <= 1e-10);
}

TEST_CASE("frozen shared state is identical across adapted layers") {
    Rng rng(12);
    ForecastModel m(ModelConfig::preset_config("desk"), rng);
    Rng init(13);
    AdapterConfig vera = AdapterConfig::for_method(Method::VeRA);
    vera.shared_seed = 99;
    auto vs = attach(m, vera, init);
    const auto first = std::dynamic_pointer_cast<VeraDelta>(vs.path(vs.adapted_targets().front()));
    REQUIRE(first);
    for (const auto& t : vs.adapted_targets()) {
        const auto p = std::dynamic_pointer_cast<VeraDelta>(vs.path(t));
        REQUIRE(p);
        CHECK(max_abs_diff(p->shared_a(), first->shared_a()) == 0.0);
        CHECK(max_abs_diff(p->shared_b(), first->shared_b()) == 0.0);
        CHECK_FALSE(p->shared_a().requires_grad());
        CHECK_FALSE(p->shared_b().requires_grad());
    }
    detach(m, vs);

    auto fourier = AdapterConfig::for_method(Method::FourierFT);
    fourier.shared_seed = 99;
    auto fs = attach(m, fourier, init);
    const auto f0 = std::dynamic_pointer_cast<FourierDelta>(fs.path(fs.adapted_targets().front()));
    REQUIRE(f0);
    for (const auto& t : fs.adapted_targets()) {
        const auto p = std::dynamic_pointer_cast<FourierDelta>(fs.path(t));
        REQUIRE(p);
        CHECK(*p->entries() == *f0->entries());
    }

    // The shared draw depends on shared_seed only, not on the init stream.
    ForecastModel other(ModelConfig::preset_config("desk"), rng);
    Rng other_init(77);
    auto fs2 = attach(other, fourier, other_init);
    const auto g0 = std::dynamic_pointer_cast<FourierDelta>(fs2.path(fs2.adapted_targets().front()));
    CHECK(*g0->entries() == *f0->entries());
}

TEST_CASE("VeRA update scales with lambda_b and vanishes with lambda_d") {
    Rng rng(14);
    ForecastModel m(ModelConfig::preset_config("desk"), rng);
    Rng init(15);
    auto state = attach(m, AdapterConfig::for_method(Method::VeRA), init);
    randomize_learnables(state, rng, 0.5);
    const auto target = state.adapted_targets()[3];
    auto path = std::dynamic_pointer_cast<VeraDelta>(state.path(target));
    const auto before = delta(state, target);
    const double s = 2.5;
    auto lb = path->lambda_b();
    for (auto& v : lb.data()) v *= s;
    const auto scaled = delta(state, target);
    for (std::size_t i = 0; i < before.numel(); ++i)
        CHECK(scaled.data()[i] == doctest::Approx(s * before.data()[i]).epsilon(1e-14));
    auto ld = path->lambda_d();
    for (auto& v : ld.data()) v = 0.0;
    const auto zeroed = delta(state, target);
    for (double v : zeroed.data()) CHECK(v == 0.0);
}

TEST_CASE("selective methods have no update matrix") {
    Rng rng(16);
    ForecastModel m(ModelConfig::preset_config("desk"), rng);
    Rng init(17);
    for (auto method : {Method::BitFit, Method::LNTuning, Method::FullFT, Method::ZeroShot}) {
        auto state = attach(m, AdapterConfig::for_method(method), init);
        CHECK(state.adapted_targets().empty());
        CHECK_THROWS_AS(delta(state, "encoder.layers.0.self_attn.q"), ContractError);
        CHECK_THROWS_AS(merge(m, state), ContractError);
    }
    auto lora = attach(m, AdapterConfig::for_method(Method::LoRA), init);
    CHECK_THROWS_AS(delta(lora, "encoder.layers.0.ff.wi"), ContractError);
    CHECK_THROWS_AS(attach(m, AdapterConfig::for_method(Method::LoRA), init), ContractError);
}

TEST_CASE("attach freezes exactly the parameters outside the method's selection") {
    Rng rng(18);
    ForecastModel m(ModelConfig::preset_config("desk"), rng);
    Rng init(19);

    auto bitfit = attach(m, AdapterConfig::for_method(Method::BitFit), init);
    for (const auto& p : m.parameters()) CHECK(p.tensor.requires_grad() == p.info.is_bias);

    auto final_only = AdapterConfig::for_method(Method::BitFit);
    final_only.bitfit_scope = BitFitScope::FinalNormOnly;
    attach(m, final_only, init);
    for (const auto& p : m.parameters()) CHECK(p.tensor.requires_grad() == (p.name == "decoder.final_norm.bias"));

    attach(m, AdapterConfig::for_method(Method::LNTuning), init);
    for (const auto& p : m.parameters()) {
        const bool attn_norm = p.name.find("attn_norm.") != std::string::npos;
        CHECK(p.tensor.requires_grad() == attn_norm);
    }

    auto all_ln = AdapterConfig::for_method(Method::LNTuning);
    all_ln.ln_scope = LnScope::All;
    attach(m, all_ln, init);
    for (const auto& p : m.parameters())
        CHECK(p.tensor.requires_grad() == (p.info.cls == model::ParamClass::LayerNorm));

    attach(m, AdapterConfig::for_method(Method::ZeroShot), init);
    CHECK(m.parameters().trainable_numel() == 0);
    attach(m, AdapterConfig::for_method(Method::FullFT), init);
    CHECK(m.parameters().trainable_numel() == m.parameters().total_numel());
}

TEST_CASE("gradients reach only trainable tensors") {
    Rng rng(20);
    ForecastModel base(ModelConfig::preset_config("desk"), rng);
    const auto ctx = random_series(72, rng);
    const auto hor = random_series(36, rng);
    for (auto method : all_methods()) {
        CAPTURE(to_string(method));
        auto m = base.clone();
        Rng init(21);
        auto state = attach(m, AdapterConfig::for_method(method), init);
        randomize_learnables(state, rng, 0.01);
        auto loss = m.window_loss(ctx, hor);
        if (method == Method::ZeroShot) {
            CHECK_FALSE(loss.requires_grad());
            continue;
        }
        numerics::backward(loss);
        for (const auto& p : m.parameters()) CHECK(p.tensor.has_grad() == p.tensor.requires_grad());
        for (const auto& f : state.frozen()) CHECK_FALSE(f.tensor.has_grad());
        for (const auto& t : trainable_tensors(m, state)) {
            REQUIRE(t.tensor.has_grad());
            bool nonzero = false;
            for (double g : t.tensor.grad()) nonzero = nonzero || g != 0.0;
            CHECK_MESSAGE(nonzero, t.name);
        }
    }
}

TEST_CASE("adapter learnables pass the finite-difference check") {
    Rng rng(22);
    ForecastModel base(ModelConfig::preset_config("desk"), rng);
    const auto ctx = random_series(72, rng);
    const auto hor = random_series(36, rng);
    for (auto method : kAdditive) {
        CAPTURE(to_string(method));
        auto m = base.clone();
        Rng init(23);
        auto state = attach(m, AdapterConfig::for_method(method), init);
        randomize_learnables(state, rng, method == Method::FourierFT ? 1e-3 : 0.05);
        std::vector<Tensor> leaves;
        for (const auto& l : state.learnables()) leaves.push_back(l.tensor);
        // A spectral coefficient moves every entry of W; a smaller step keeps the
        // probe from straddling ReLU kinks.
        const double h = method == Method::FourierFT ? 1e-6 : 1e-5;
        auto r = testing::gradcheck([&] { return m.window_loss(ctx, hor); }, leaves, h, 1e-4, 2);
        CHECK(r.max_rel_error < 1e-4);
    }
}

TEST_CASE("closed-form counts reproduce the published budgets") {
    const auto tiny = ModelConfig::preset_config("tiny");
    const auto base = ModelConfig::preset_config("base");
    auto vera = AdapterConfig::for_method(Method::VeRA);
    CHECK(count_trainable_params(vera, tiny).total == 13056);
    vera.rank = 1;
    CHECK(count_trainable_params(vera, tiny).total == 12336);
    auto fourier = AdapterConfig::for_method(Method::FourierFT);
    CHECK(count_trainable_params(fourier, tiny).total == 2400);
    fourier.n_coefficients = 200;
    CHECK(count_trainable_params(fourier, tiny).total == 9600);
    CHECK(count_trainable_params(AdapterConfig::for_method(Method::LoRA), tiny).total == 49152);
    CHECK(count_trainable_params(AdapterConfig::for_method(Method::LoRA), base).total == 442368);
    CHECK(count_trainable_params(AdapterConfig::for_method(Method::ZeroShot), tiny).total == 0);
    auto final_only = AdapterConfig::for_method(Method::BitFit);
    final_only.bitfit_scope = BitFitScope::FinalNormOnly;
    CHECK(count_trainable_params(final_only, tiny).total == 256);
    CHECK(count_trainable_params(final_only, base).total == 768);
    const auto full = count_trainable_params(AdapterConfig::for_method(Method::FullFT), tiny);
    CHECK(std::abs(static_cast<double>(full.total) - 8.3e6) / 8.3e6 < 0.02);
}

TEST_CASE("closed-form counts equal the live registry") {
    std::vector<AdapterConfig> configs;
    for (auto m : all_methods()) configs.push_back(AdapterConfig::for_method(m));
    auto c = AdapterConfig::for_method(Method::BitFit);
    c.bitfit_scope = BitFitScope::FinalNormOnly;
    configs.push_back(c);
    c = AdapterConfig::for_method(Method::LNTuning);
    c.ln_scope = LnScope::All;
    configs.push_back(c);
    c = AdapterConfig::for_method(Method::LoRA);
    c.targets = {model::Projection::Q, model::Projection::V};
    c.rank = 4;
    configs.push_back(c);

    for (const auto& preset : {"desk", "tiny"}) {
        auto mcfg = ModelConfig::preset_config(preset);
        Rng rng(24);
        ForecastModel m(mcfg, rng);
        for (const auto& cfg : configs) {
            CAPTURE(preset);
            CAPTURE(to_string(cfg.method));
            Rng init(25);
            auto state = attach(m, cfg, init);
            const auto report = count_trainable_params(cfg, mcfg);
            CHECK(report.total == live_trainable_count(m, state));
            CHECK(report.full_ft_total == m.parameters().total_numel());
            detach(m, state);
        }
    }
    for (const auto& preset : ModelConfig::preset_names()) {
        for (bool bias : {true, false}) {
            auto mcfg = ModelConfig::preset_config(preset);
            mcfg.include_linear_bias = bias;
            for (const auto& cfg : configs) {
                CAPTURE(preset);
                CAPTURE(to_string(cfg.method));
                CHECK(count_trainable_params(cfg, mcfg).total == layout_trainable_count(cfg, mcfg));
            }
        }
    }
}

TEST_CASE("millions formatting") {
    CHECK(format_millions(2400) == "0.0024");
    CHECK(format_millions(442368) == "0.442");
    CHECK(format_millions(13056) == "0.0131");
    CHECK(format_millions(8454144) == "8.45");
    CHECK(format_millions(0) == "0");
    CHECK(format_millions(25) == "0.000025");
    CHECK(round_millions(1179648, 1) == "1.2");
    CHECK(round_millions(12480, 4) == "0.0125");
    CHECK(round_millions(7200, 3) == "0.007");
    CHECK(round_millions(49152, 3) == "0.049");
    CHECK(round_millions(500000, 0) == "1");
}

TEST_CASE("adapter config validation and text round-trip") {
    const auto desk = ModelConfig::preset_config("desk");
    auto c = AdapterConfig::for_method(Method::LoRA);
    c.rank = 0;
    CHECK_THROWS_AS(c.validate(desk), ConfigError);
    c = AdapterConfig::for_method(Method::FourierFT);
    c.n_coefficients = 64 * 64 + 1;
    CHECK_THROWS_AS(c.validate(desk), ConfigError);
    c.n_coefficients = 64 * 64;
    CHECK_NOTHROW(c.validate(desk));
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(desk), ConfigError);
    c = AdapterConfig::for_method(Method::VeRA);
    c.targets.clear();
    CHECK_THROWS_AS(c.validate(desk), ConfigError);
    CHECK_THROWS_AS(parse_method("prefix-tuning"), ConfigError);
    CHECK(parse_method("LoRA") == Method::LoRA);
    CHECK(parse_method("LN_Tuning") == Method::LNTuning);
    CHECK_THROWS_AS(parse_targets("qx"), ConfigError);
    CHECK_THROWS_AS(parse_targets("qq"), ConfigError);

    auto v = AdapterConfig::for_method(Method::FourierFT);
    v.targets = {model::Projection::V, model::Projection::Q};
    v.alpha = 123.456;
    v.shared_seed = 18446744073709551615ULL;
    v.ln_scope = LnScope::All;
    CHECK(AdapterConfig::parse(v.to_text()) == v);
}

TEST_CASE("adapter checkpoints restore forecasts bit-exactly on a fresh base") {
    Rng rng(26);
    ForecastModel base(ModelConfig::preset_config("desk"), rng);
    const auto ctx = random_series(72, rng);
    const Rng sampler(27);
    for (auto method : {Method::LoRA, Method::VeRA, Method::FourierFT, Method::BitFit, Method::LNTuning}) {
        CAPTURE(to_string(method));
        auto m = base.clone();
        Rng init(28);
        auto cfg = AdapterConfig::for_method(method);
        cfg.shared_seed = 31;
        auto state = attach(m, cfg, init);
        randomize_learnables(state, rng, method == Method::FourierFT ? 1e-3 : 0.05);
        for (auto& t : trainable_tensors(m, state))
            for (auto& v : t.tensor.data()) v += rng.uniform(-0.01, 0.01);
        std::stringstream buf;
        save_adapter(m, state, buf);

        auto fresh = base.clone();
        auto loaded = load_adapter(fresh, buf);
        CHECK(loaded.config() == cfg);
        const auto a = model::sample_forecast(m, ctx, 4, sampler);
        const auto b = model::sample_forecast(fresh, ctx, 4, sampler);
        CHECK(a == b);
    }
    auto tiny_cfg = ModelConfig::preset_config("desk");
    tiny_cfg.d_ff = 256;
    Rng other(29);
    ForecastModel mismatched(tiny_cfg, other);
    auto m = base.clone();
    Rng init(30);
    auto state = attach(m, AdapterConfig::for_method(Method::LoRA), init);
    std::stringstream buf;
    save_adapter(m, state, buf);
    CHECK_THROWS_AS(load_adapter(mismatched, buf), FormatError);
}
