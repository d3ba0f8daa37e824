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
#include <span>

// Raw row-major kernels shared by the autodiff ops and the inference fast path.
namespace vitalpeft::kernels {

/// C[m x n] (+)= A[m x k] * B[k x n]
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate);

/// C[m x n] (+)= A[m x k] * B[n x k]^T
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate);

/// C[m x n] (+)= A[k x m]^T * B[k x n]
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c, bool accumulate);

/// Per-row layer normalization. mean/rstd receive one value per row when non-null.
/// gamma may be null (unit scale); beta may be null (zero shift).
void layer_norm_rows(std::size_t rows, std::size_t cols, const double* x, const double* gamma,
                     const double* beta, double eps, double* y, double* mean, double* rstd);

/// In-place numerically stable softmax over the first `len` entries of a row.
void softmax_inplace(double* row, std::size_t len);

/// Multi-head scaled dot-product attention for one sequence.
/// q: [tq x d], k/v: [tk x d], out: [tq x d]. When causal, query i sees keys j <= i + offset.
/// probs (optional) receives [heads x tq x tk] attention weights.
void attention(std::size_t tq, std::size_t tk, std::size_t d, std::size_t heads, const double* q,
               const double* k, const double* v, bool causal, std::size_t causal_offset,
               double* out, double* probs);

/// Gradients of attention() given its saved probs; results are added into dq/dkey/dv
/// (each may be null).
void attention_backward(std::size_t tq, std::size_t tk, std::size_t d, std::size_t heads, const double* q,
                        const double* k, const double* v, const double* probs, const double* grad_out,
                        double* dq, double* dkey, double* dv);

double dot(const double* a, const double* b, std::size_t n);

}  // namespace vitalpeft::kernels
