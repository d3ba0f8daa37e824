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

#include "vitalpeft/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "vitalpeft/errors.hpp"
#include "vitalpeft/numerics/kernels.hpp"

namespace vitalpeft::numerics {

namespace {

// Gradient buffer of parent i, or null when that parent is frozen.
double* parent_grad(Node& self, std::size_t i) {
    Node& p = *self.parents[i];
    if (!p.requires_grad) return nullptr;
    return p.ensure_grad().data();
}

const std::vector<double>& parent_data(Node& self, std::size_t i) { return self.parents[i]->data; }

void require_matrix(const Tensor& t, const char* what) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(what) + " expects a matrix, got shape " +
                             shape_to_string(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) +
                             " vs " + shape_to_string(b.shape()));
    }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul: inner dimensions disagree for " + shape_to_string(a.shape()) +
                             " and " + shape_to_string(b.shape()));
    }
    std::vector<double> out(m * n);
    kernels::gemm_nn(m, k, n, a.ptr(), b.ptr(), out.data(), false);
    return Tensor::from_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
        const double* dc = self.grad.data();
        if (double* da = parent_grad(self, 0)) kernels::gemm_nt(m, n, k, dc, parent_data(self, 1).data(), da, true);
        if (double* db = parent_grad(self, 1)) kernels::gemm_tn(k, m, n, parent_data(self, 0).data(), dc, db, true);
    });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul_nt");
    require_matrix(b, "matmul_nt");
    const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    if (b.cols() != k) {
        throw DimensionError("matmul_nt: inner dimensions disagree for " +
                             shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()) + "^T");
    }
    std::vector<double> out(m * n);
    kernels::gemm_nt(m, k, n, a.ptr(), b.ptr(), out.data(), false);
    return Tensor::from_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
        const double* dc = self.grad.data();
        if (double* da = parent_grad(self, 0)) kernels::gemm_nn(m, n, k, dc, parent_data(self, 1).data(), da, true);
        if (double* db = parent_grad(self, 1)) kernels::gemm_tn(n, m, k, dc, parent_data(self, 0).data(), db, true);
    });
}

Tensor transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    std::vector<double> out(m * n);
    const double* src = a.ptr();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = src[i * n + j];
    return Tensor::from_op({n, m}, std::move(out), {a}, [m, n](Node& self) {
        if (double* da = parent_grad(self, 0)) {
            const double* g = self.grad.data();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) da[i * n + j] += g[j * m + i];
        }
    });
}

Tensor elementwise(Elementwise op, const Tensor& a, const Tensor& b) {
    const bool broadcast = b.numel() == 1 && a.shape() != b.shape();
    if (!broadcast) require_same_shape(a, b, "elementwise");
    const std::size_t n = a.numel();
    const double* x = a.ptr();
    const double* y = b.ptr();
    std::vector<double> out(n);
    auto rhs = [&](std::size_t i) { return broadcast ? y[0] : y[i]; };
    switch (op) {
        case Elementwise::Add: for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + rhs(i); break;
        case Elementwise::Sub: for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - rhs(i); break;
        case Elementwise::Mul: for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * rhs(i); break;
        default: throw ContractError("elementwise: op is not binary");
    }
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [op, n, broadcast](Node& self) {
        const double* g = self.grad.data();
        const auto& xa = parent_data(self, 0);
        const auto& yb = parent_data(self, 1);
        double* da = parent_grad(self, 0);
        double* db = parent_grad(self, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t bi = broadcast ? 0 : i;
            switch (op) {
                case Elementwise::Add:
                    if (da) da[i] += g[i];
                    if (db) db[bi] += g[i];
                    break;
                case Elementwise::Sub:
                    if (da) da[i] += g[i];
                    if (db) db[bi] -= g[i];
                    break;
                default:
                    if (da) da[i] += g[i] * yb[bi];
                    if (db) db[bi] += g[i] * xa[i];
                    break;
            }
        }
    });
}

Tensor elementwise(Elementwise op, const Tensor& a, double factor) {
    const std::size_t n = a.numel();
    const double* x = a.ptr();
    std::vector<double> out(n);
    switch (op) {
        case Elementwise::Scale: for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * factor; break;
        case Elementwise::Exp: for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(x[i]); break;
        case Elementwise::Log: for (std::size_t i = 0; i < n; ++i) out[i] = std::log(x[i]); break;
        case Elementwise::Relu: for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0; break;
        default: throw ContractError("elementwise: op needs two operands");
    }
    return Tensor::from_op(a.shape(), std::move(out), {a}, [op, n, factor](Node& self) {
        double* da = parent_grad(self, 0);
        if (!da) return;
        const double* g = self.grad.data();
        const auto& xa = parent_data(self, 0);
        const auto& y = self.data;
        switch (op) {
            case Elementwise::Scale: for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * factor; break;
            case Elementwise::Exp: for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * y[i]; break;
            case Elementwise::Log: for (std::size_t i = 0; i < n; ++i) da[i] += g[i] / xa[i]; break;
            default: for (std::size_t i = 0; i < n; ++i) if (xa[i] > 0.0) da[i] += g[i]; break;
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::Add, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::Sub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::Mul, a, b); }
Tensor scale(const Tensor& a, double factor) { return elementwise(Elementwise::Scale, a, factor); }
Tensor exp(const Tensor& a) { return elementwise(Elementwise::Exp, a); }
Tensor log(const Tensor& a) { return elementwise(Elementwise::Log, a); }
Tensor relu(const Tensor& a) { return elementwise(Elementwise::Relu, a); }

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    const std::size_t n = a.numel();
    return Tensor::from_op({}, {s}, {a}, [n](Node& self) {
        if (double* da = parent_grad(self, 0)) {
            const double g = self.grad[0];
            for (std::size_t i = 0; i < n; ++i) da[i] += g;
        }
    });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.numel())); }

Tensor add_row(const Tensor& x, const Tensor& b) {
    require_matrix(x, "add_row");
    const std::size_t m = x.rows(), n = x.cols();
    if (b.numel() != n) {
        throw DimensionError("add_row: row vector " + shape_to_string(b.shape()) +
                             " does not fit " + shape_to_string(x.shape()));
    }
    std::vector<double> out(x.data().begin(), x.data().end());
    const double* bv = b.ptr();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bv[j];
    return Tensor::from_op({m, n}, std::move(out), {x, b}, [m, n](Node& self) {
        const double* g = self.grad.data();
        if (double* dx = parent_grad(self, 0))
            for (std::size_t i = 0; i < m * n; ++i) dx[i] += g[i];
        if (double* db = parent_grad(self, 1))
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) db[j] += g[i * n + j];
    });
}

Tensor scale_columns(const Tensor& x, const Tensor& v) {
    require_matrix(x, "scale_columns");
    const std::size_t m = x.rows(), n = x.cols();
    if (v.numel() != n) {
        throw DimensionError("scale_columns: vector " + shape_to_string(v.shape()) +
                             " does not fit " + shape_to_string(x.shape()));
    }
    std::vector<double> out(m * n);
    const double* xv = x.ptr();
    const double* vv = v.ptr();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = xv[i * n + j] * vv[j];
    return Tensor::from_op({m, n}, std::move(out), {x, v}, [m, n](Node& self) {
        const double* g = self.grad.data();
        const auto& xv = parent_data(self, 0);
        const auto& vv = parent_data(self, 1);
        if (double* dx = parent_grad(self, 0))
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) dx[i * n + j] += g[i * n + j] * vv[j];
        if (double* dv = parent_grad(self, 1))
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) dv[j] += g[i * n + j] * xv[i * n + j];
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    require_matrix(x, "layer_norm");
    const std::size_t m = x.rows(), n = x.cols();
    if (gamma.numel() != n || (beta.defined() && beta.numel() != n)) {
        throw DimensionError("layer_norm: parameters do not match feature width " + std::to_string(n));
    }
    std::vector<double> out(m * n);
    auto stats = std::make_shared<std::vector<double>>(2 * m);  // mean then rstd
    kernels::layer_norm_rows(m, n, x.ptr(), gamma.ptr(), beta.defined() ? beta.ptr() : nullptr, eps,
                             out.data(), stats->data(), stats->data() + m);
    std::vector<Tensor> parents{x, gamma};
    if (beta.defined()) parents.push_back(beta);
    const bool has_beta = beta.defined();
    return Tensor::from_op({m, n}, std::move(out), std::move(parents), [m, n, stats, has_beta](Node& self) {
        const double* g = self.grad.data();
        const auto& xv = parent_data(self, 0);
        const auto& gv = parent_data(self, 1);
        double* dx = parent_grad(self, 0);
        double* dgamma = parent_grad(self, 1);
        double* dbeta = has_beta ? parent_grad(self, 2) : nullptr;
        const double* mu = stats->data();
        const double* rs = stats->data() + m;
        std::vector<double> xhat(n), dxhat(n);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < m; ++i) {
            const double* gr = g + i * n;
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                xhat[j] = (xv[i * n + j] - mu[i]) * rs[i];
                dxhat[j] = gr[j] * gv[j];
                mean_dxhat += dxhat[j];
                mean_dxhat_xhat += dxhat[j] * xhat[j];
                if (dgamma) dgamma[j] += gr[j] * xhat[j];
                if (dbeta) dbeta[j] += gr[j];
            }
            if (!dx) continue;
            mean_dxhat *= inv_n;
            mean_dxhat_xhat *= inv_n;
            for (std::size_t j = 0; j < n; ++j)
                dx[i * n + j] += rs[i] * (dxhat[j] - mean_dxhat - xhat[j] * mean_dxhat_xhat);
        }
    });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads, bool causal) {
    require_matrix(q, "attention");
    require_matrix(k, "attention");
    require_matrix(v, "attention");
    const std::size_t tq = q.rows(), tk = k.rows(), d = q.cols();
    if (k.cols() != d || v.cols() != d || v.rows() != tk) {
        throw DimensionError("attention: incompatible q/k/v shapes " + shape_to_string(q.shape()) + ", " +
                             shape_to_string(k.shape()) + ", " + shape_to_string(v.shape()));
    }
    if (heads == 0 || d % heads != 0) {
        throw DimensionError("attention: width " + std::to_string(d) + " not divisible by " +
                             std::to_string(heads) + " heads");
    }
    std::vector<double> out(tq * d);
    auto probs = std::make_shared<std::vector<double>>(heads * tq * tk);
    kernels::attention(tq, tk, d, heads, q.ptr(), k.ptr(), v.ptr(), causal, 0, out.data(), probs->data());
    return Tensor::from_op({tq, d}, std::move(out), {q, k, v}, [tq, tk, d, heads, probs](Node& self) {
        kernels::attention_backward(tq, tk, d, heads, parent_data(self, 0).data(), parent_data(self, 1).data(),
                                    parent_data(self, 2).data(), probs->data(), self.grad.data(),
                                    parent_grad(self, 0), parent_grad(self, 1), parent_grad(self, 2));
    });
}

Tensor embedding(const Tensor& table, std::span<const std::size_t> ids) {
    require_matrix(table, "embedding");
    const std::size_t vocab = table.rows(), d = table.cols();
    std::vector<double> out(ids.size() * d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] >= vocab) {
            throw IndexError("token id " + std::to_string(ids[i]) + " out of range for vocabulary of " +
                             std::to_string(vocab));
        }
        std::copy_n(table.ptr() + ids[i] * d, d, out.data() + i * d);
    }
    auto saved = std::make_shared<std::vector<std::size_t>>(ids.begin(), ids.end());
    return Tensor::from_op({ids.size(), d}, std::move(out), {table}, [saved, d](Node& self) {
        double* dt = parent_grad(self, 0);
        if (!dt) return;
        const double* g = self.grad.data();
        for (std::size_t i = 0; i < saved->size(); ++i) {
            double* row = dt + (*saved)[i] * d;
            for (std::size_t c = 0; c < d; ++c) row[c] += g[i * d + c];
        }
    });
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    require_matrix(t, "slice_rows");
    if (begin > end || end > t.rows()) {
        throw IndexError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + shape_to_string(t.shape()));
    }
    const std::size_t n = t.cols();
    std::vector<double> out(t.ptr() + begin * n, t.ptr() + end * n);
    return Tensor::from_op({end - begin, n}, std::move(out), {t}, [begin, end, n](Node& self) {
        double* dt = parent_grad(self, 0);
        if (!dt) return;
        for (std::size_t i = 0; i < (end - begin) * n; ++i) dt[begin * n + i] += self.grad[i];
    });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
    require_matrix(logits, "softmax_cross_entropy");
    const std::size_t batch = logits.rows(), classes = logits.cols();
    if (targets.size() != batch) {
        throw DimensionError("softmax_cross_entropy: " + std::to_string(targets.size()) +
                             " targets for " + std::to_string(batch) + " rows");
    }
    auto probs = std::make_shared<std::vector<double>>(logits.data().begin(), logits.data().end());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        if (targets[i] >= classes) {
            throw IndexError("target " + std::to_string(targets[i]) + " out of range for " +
                             std::to_string(classes) + " classes");
        }
        double* row = probs->data() + i * classes;
        const double* lr = logits.ptr() + i * classes;
        double mx = lr[0];
        for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, lr[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < classes; ++j) total += std::exp(lr[j] - mx);
        const double log_z = mx + std::log(total);
        loss += log_z - lr[targets[i]];
        for (std::size_t j = 0; j < classes; ++j) row[j] = std::exp(lr[j] - log_z);
    }
    loss /= static_cast<double>(batch);
    auto saved = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
    return Tensor::from_op({}, {loss}, {logits}, [probs, saved, batch, classes](Node& self) {
        double* dl = parent_grad(self, 0);
        if (!dl) return;
        const double g = self.grad[0] / static_cast<double>(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            const double* p = probs->data() + i * classes;
            for (std::size_t j = 0; j < classes; ++j) dl[i * classes + j] += g * p[j];
            dl[i * classes + (*saved)[i]] -= g;
        }
    });
}

}  // namespace vitalpeft::numerics
