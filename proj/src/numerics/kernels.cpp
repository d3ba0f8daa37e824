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

#include "vitalpeft/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace vitalpeft::kernels {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMajor>;
using ConstMatMap = Eigen::Map<const RowMajor>;
using StridedMap = Eigen::Map<RowMajor, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMajor, 0, Eigen::OuterStride<>>;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate) {
    auto out = MatMap(c, idx(m), idx(n));
    const auto lhs = ConstMatMap(a, idx(m), idx(k));
    const auto rhs = ConstMatMap(b, idx(k), idx(n));
    if (accumulate) {
        out.noalias() += lhs * rhs;
    } else {
        out.noalias() = lhs * rhs;
    }
}

void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate) {
    auto out = MatMap(c, idx(m), idx(n));
    const auto lhs = ConstMatMap(a, idx(m), idx(k));
    const auto rhs = ConstMatMap(b, idx(n), idx(k));
    if (accumulate) {
        out.noalias() += lhs * rhs.transpose();
    } else {
        out.noalias() = lhs * rhs.transpose();
    }
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate) {
    auto out = MatMap(c, idx(m), idx(n));
    const auto lhs = ConstMatMap(a, idx(k), idx(m));
    const auto rhs = ConstMatMap(b, idx(k), idx(n));
    if (accumulate) {
        out.noalias() += lhs.transpose() * rhs;
    } else {
        out.noalias() = lhs.transpose() * rhs;
    }
}

void layer_norm_rows(std::size_t rows, std::size_t cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y, double* mean, double* rstd) {
    const double inv_n = 1.0 / static_cast<double>(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = x + r * cols;
        double* yr = y + r * cols;
        double mu = 0.0;
        for (std::size_t c = 0; c < cols; ++c) mu += xr[c];
        mu *= inv_n;
        double var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = xr[c] - mu;
            var += d * d;
        }
        var *= inv_n;
        const double rs = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < cols; ++c) {
            double v = (xr[c] - mu) * rs;
            if (gamma) v *= gamma[c];
            if (beta) v += beta[c];
            yr[c] = v;
        }
        if (mean) mean[r] = mu;
        if (rstd) rstd[r] = rs;
    }
}

void softmax_inplace(double* row, std::size_t len) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < len; ++j) mx = std::max(mx, row[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < len; ++j) {
        row[j] = std::exp(row[j] - mx);
        total += row[j];
    }
    const double inv = 1.0 / total;
    for (std::size_t j = 0; j < len; ++j) row[j] *= inv;
}

void attention(std::size_t tq, std::size_t tk, std::size_t d, std::size_t heads, const double* q,
               const double* k, const double* v, bool causal, std::size_t causal_offset,
               double* out, double* probs) {
    const std::size_t dk = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
    const Eigen::OuterStride<> stride(idx(d));
    RowMajor scores(idx(tq), idx(tk));
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dk;
        const ConstStridedMap qh(q + off, idx(tq), idx(dk), stride);
        const ConstStridedMap kh(k + off, idx(tk), idx(dk), stride);
        const ConstStridedMap vh(v + off, idx(tk), idx(dk), stride);
        scores.noalias() = qh * kh.transpose();
        scores *= inv_sqrt;
        for (std::size_t i = 0; i < tq; ++i) {
            const std::size_t visible = causal ? std::min(tk, i + causal_offset + 1) : tk;
            double* row = scores.data() + i * tk;
            softmax_inplace(row, visible);
            std::fill(row + visible, row + tk, 0.0);
        }
        StridedMap oh(out + off, idx(tq), idx(dk), stride);
        oh.noalias() = scores * vh;
        if (probs) std::copy(scores.data(), scores.data() + tq * tk, probs + h * tq * tk);
    }
}

void attention_backward(std::size_t tq, std::size_t tk, std::size_t d, std::size_t heads, const double* q,
                        const double* k, const double* v, const double* probs, const double* grad_out,
                        double* dq, double* dkey, double* dv) {
    const std::size_t dk = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
    const Eigen::OuterStride<> stride(idx(d));
    RowMajor dp(idx(tq), idx(tk));
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dk;
        const ConstMatMap p(probs + h * tq * tk, idx(tq), idx(tk));
        const ConstStridedMap g(grad_out + off, idx(tq), idx(dk), stride);
        const ConstStridedMap qh(q + off, idx(tq), idx(dk), stride);
        const ConstStridedMap kh(k + off, idx(tk), idx(dk), stride);
        const ConstStridedMap vh(v + off, idx(tk), idx(dk), stride);
        if (dv) StridedMap(dv + off, idx(tk), idx(dk), stride).noalias() += p.transpose() * g;
        if (!dq && !dkey) continue;
        dp.noalias() = g * vh.transpose();
        const Eigen::VectorXd row_dot = dp.cwiseProduct(p).rowwise().sum();
        dp = p.cwiseProduct(dp.colwise() - row_dot) * inv_sqrt;
        if (dq) StridedMap(dq + off, idx(tq), idx(dk), stride).noalias() += dp * kh;
        if (dkey) StridedMap(dkey + off, idx(tk), idx(dk), stride).noalias() += dp.transpose() * qh;
    }
}

}  // namespace vitalpeft::kernels
