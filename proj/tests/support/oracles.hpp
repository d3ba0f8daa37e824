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

#include <algorithm>
#include <complex>
#include <limits>
#include <cstddef>
#include <numbers>
#include <vector>

namespace vitalpeft::testing {

// Inverse 2-D DFT straight from the definition, one full double sum per output entry.
inline std::vector<std::complex<double>> naive_inverse_dft2(const std::vector<std::complex<double>>& s,
                                                            std::size_t rows, std::size_t cols) {
    std::vector<std::complex<double>> out(rows * cols);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t p = 0; p < rows; ++p) {
        for (std::size_t q = 0; q < cols; ++q) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t u = 0; u < rows; ++u) {
                for (std::size_t v = 0; v < cols; ++v) {
                    const double angle = two_pi * (static_cast<double>(u * p) / static_cast<double>(rows) +
                                                   static_cast<double>(v * q) / static_cast<double>(cols));
                    acc += s[u * cols + v] * std::complex<double>(std::cos(angle), std::sin(angle));
                }
            }
            out[p * cols + q] = acc / static_cast<double>(rows * cols);
        }
    }
    return out;
}

namespace detail {

inline void enumerate_alignments(const std::vector<double>& a, const std::vector<double>& b, std::size_t i,
                                 std::size_t j, double cost, double& best) {
    const double d = a[i] - b[j];
    cost += d * d;
    if (i + 1 == a.size() && j + 1 == b.size()) {
        best = std::min(best, cost);
        return;
    }
    if (i + 1 < a.size()) enumerate_alignments(a, b, i + 1, j, cost, best);
    if (j + 1 < b.size()) enumerate_alignments(a, b, i, j + 1, cost, best);
    if (i + 1 < a.size() && j + 1 < b.size()) enumerate_alignments(a, b, i + 1, j + 1, cost, best);
}

}  // namespace detail

// Minimum squared-cost alignment found by walking every monotone path from (0,0) to (m-1,n-1).
inline double brute_force_dtw(const std::vector<double>& a, const std::vector<double>& b) {
    double best = std::numeric_limits<double>::infinity();
    detail::enumerate_alignments(a, b, 0, 0, 0.0, best);
    return best;
}

}  // namespace vitalpeft::testing
