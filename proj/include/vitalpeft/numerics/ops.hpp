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
#include <vector>

#include "vitalpeft/numerics/tensor.hpp"

// Differentiable ops. Matrices are rank-2 row-major tensors; "row vector" means rank-1.
namespace vitalpeft::numerics {

Tensor matmul(const Tensor& a, const Tensor& b);
/// a[m x k] * b[n x k]^T, the linear-layer product against a [d_out x d_in] weight.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

enum class Elementwise { Add, Sub, Mul, Scale, Exp, Log, Relu };

/// Binary ops accept equal shapes or a one-element `b` (scalar broadcast).
Tensor elementwise(Elementwise op, const Tensor& a, const Tensor& b);
/// Unary ops; `factor` is only read by Scale.
Tensor elementwise(Elementwise op, const Tensor& a, double factor = 1.0);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// x[m x n] + b[n] on every row.
Tensor add_row(const Tensor& x, const Tensor& b);
/// x[m x n] with column j multiplied by v[j] (right-multiplication by diag(v)).
Tensor scale_columns(const Tensor& x, const Tensor& v);

/// Per-row layer norm with learned scale and optional bias (pass an undefined tensor to skip).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

/// Multi-head scaled dot-product attention over already-projected q/k/v.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads, bool causal);

/// Rows of `table` selected by `ids`.
Tensor embedding(const Tensor& table, std::span<const std::size_t> ids);

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);

/// Mean negative log-likelihood of `targets` under row-wise softmax(logits).
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets);

}  // namespace vitalpeft::numerics
