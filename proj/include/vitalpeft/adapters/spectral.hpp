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

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "vitalpeft/numerics/rng.hpp"
#include "vitalpeft/numerics/tensor.hpp"

namespace vitalpeft::adapters {

/// One location (row, col) in a rows x cols spectral grid.
struct SpectralEntry {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const SpectralEntry&) const = default;
    auto operator<=>(const SpectralEntry&) const = default;
};

/// 2-D inverse DFT, x[p,q] = 1/(R*C) * sum_{u,v} S[u,v] * exp(+2*pi*i*(u*p/R + v*q/C)).
std::vector<std::complex<double>> inverse_dft2(std::span<const std::complex<double>> spectrum,
                                               std::size_t rows, std::size_t cols);

/// Real part of inverse_dft2 for a real-valued spectrum.
std::vector<double> inverse_dft2_real(std::span<const double> spectrum, std::size_t rows, std::size_t cols);

/// `count` distinct grid locations drawn uniformly without replacement (Floyd's
/// algorithm), returned in row-major order.
std::vector<SpectralEntry> sample_spectral_entries(std::size_t rows, std::size_t cols, std::size_t count,
                                                   numerics::Rng& rng);

/// dW = alpha * Re(IDFT2(S)) with S zero except S[entries[j]] = coefficients[j].
/// Differentiable in `coefficients`: dL/dc_j = alpha * Re(IDFT2(dL/dW))[entries[j]].
numerics::Tensor fourier_delta(const numerics::Tensor& coefficients,
                               std::shared_ptr<const std::vector<SpectralEntry>> entries, std::size_t rows,
                               std::size_t cols, double alpha);

}  // namespace vitalpeft::adapters
