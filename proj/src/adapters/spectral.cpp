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

#include "vitalpeft/adapters/spectral.hpp"

#include <algorithm>
#include <limits>
#include <new>
#include <set>

#include <fftw3.h>

#include "vitalpeft/errors.hpp"

namespace vitalpeft::adapters {

namespace {

// FFTW's backward transform is the unnormalized sum with exp(+2*pi*i*...), so the
// inverse DFT is that result divided by rows*cols.
class Plan2d {
public:
    Plan2d(std::size_t rows, std::size_t cols) : n_(rows * cols) {
        if (rows == 0 || cols == 0) throw DimensionError("inverse_dft2: empty spectral grid");
        if (rows > static_cast<std::size_t>(std::numeric_limits<int>::max()) ||
            cols > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
            throw DimensionError("inverse_dft2: grid too large");
        }
        buf_ = fftw_alloc_complex(n_);
        if (!buf_) throw std::bad_alloc();
        plan_ = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf_, buf_, FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
        if (!plan_) {
            fftw_free(buf_);
            throw NumericError("inverse_dft2: FFTW could not create a plan");
        }
    }
    ~Plan2d() {
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    Plan2d(const Plan2d&) = delete;
    Plan2d& operator=(const Plan2d&) = delete;

    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
    void execute() { fftw_execute(plan_); }
    double norm() const { return 1.0 / static_cast<double>(n_); }

private:
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan plan_ = nullptr;
};

void check_size(std::size_t got, std::size_t rows, std::size_t cols) {
    if (got != rows * cols) {
        throw DimensionError("inverse_dft2: spectrum has " + std::to_string(got) + " entries, grid is " +
                             std::to_string(rows) + "x" + std::to_string(cols));
    }
}

}  // namespace

std::vector<std::complex<double>> inverse_dft2(std::span<const std::complex<double>> spectrum, std::size_t rows,
                                               std::size_t cols) {
    Plan2d plan(rows, cols);
    check_size(spectrum.size(), rows, cols);
    std::copy(spectrum.begin(), spectrum.end(), plan.data());
    plan.execute();
    std::vector<std::complex<double>> out(plan.data(), plan.data() + rows * cols);
    for (auto& v : out) v *= plan.norm();
    return out;
}

std::vector<double> inverse_dft2_real(std::span<const double> spectrum, std::size_t rows, std::size_t cols) {
    Plan2d plan(rows, cols);
    check_size(spectrum.size(), rows, cols);
    auto* buf = plan.data();
    for (std::size_t i = 0; i < spectrum.size(); ++i) buf[i] = {spectrum[i], 0.0};
    plan.execute();
    std::vector<double> out(rows * cols);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real() * plan.norm();
    return out;
}

std::vector<SpectralEntry> sample_spectral_entries(std::size_t rows, std::size_t cols, std::size_t count,
                                                   numerics::Rng& rng) {
    const std::size_t total = rows * cols;
    if (count == 0 || count > total) {
        throw ConfigError("spectral coefficient count " + std::to_string(count) + " outside [1, " +
                          std::to_string(total) + "]");
    }
    std::set<std::size_t> chosen;
    for (std::size_t j = total - count; j < total; ++j) {
        const std::size_t t = rng.below(j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
    }
    std::vector<SpectralEntry> out;
    out.reserve(count);
    for (auto flat : chosen) out.push_back({flat / cols, flat % cols});
    return out;
}

numerics::Tensor fourier_delta(const numerics::Tensor& coefficients,
                               std::shared_ptr<const std::vector<SpectralEntry>> entries, std::size_t rows,
                               std::size_t cols, double alpha) {
    if (coefficients.numel() != entries->size()) {
        throw DimensionError("fourier_delta: " + std::to_string(coefficients.numel()) + " coefficients for " +
                             std::to_string(entries->size()) + " spectral entries");
    }
    std::vector<double> spectrum(rows * cols, 0.0);
    for (std::size_t j = 0; j < entries->size(); ++j) {
        const auto& e = (*entries)[j];
        spectrum[e.row * cols + e.col] = coefficients.data()[j];
    }
    auto delta = inverse_dft2_real(spectrum, rows, cols);
    for (auto& v : delta) v *= alpha;
    return numerics::Tensor::from_op({rows, cols}, std::move(delta), {coefficients},
                                     [entries, rows, cols, alpha](numerics::Node& self) {
                                         auto& parent = *self.parents[0];
                                         if (!parent.requires_grad) return;
                                         auto& dc = parent.ensure_grad();
                                         // The real-part IDFT kernel is symmetric in (u,v) <-> (p,q).
                                         const auto back = inverse_dft2_real(self.grad, rows, cols);
                                         for (std::size_t j = 0; j < entries->size(); ++j) {
                                             const auto& e = (*entries)[j];
                                             dc[j] += alpha * back[e.row * cols + e.col];
                                         }
                                     });
}

}  // namespace vitalpeft::adapters
