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
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vitalpeft::numerics {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

struct Node;

/// Backward closure: reads the node's own grad, accumulates into parents.
using BackwardFn = std::function<void(Node& self)>;

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty == absent
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    BackwardFn backward_fn;
    bool released = false;  // graph already consumed by backward()

    bool is_leaf() const { return !backward_fn; }
    std::vector<double>& ensure_grad();
};

/// Shared handle to a dense row-major float64 array with an optional gradient.
///
/// Copies alias the same storage (like a framework tensor handle). Use `clone()`
/// for an independent copy. Ops recorded while grad mode is on form a graph that
/// `backward()` walks once and then releases.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0, bool requires_grad = false);
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor scalar(double v, bool requires_grad = false);
    static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows,
                            bool requires_grad = false);

    /// Build an op result. `parents` are recorded only when grad mode is on and at
    /// least one parent requires grad.
    static Tensor from_op(Shape shape, std::vector<double> data,
                          std::vector<Tensor> parents, BackwardFn backward);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t dim(std::size_t i) const;
    std::size_t rank() const { return shape().size(); }
    std::size_t numel() const;
    std::size_t rows() const { return dim(0); }
    std::size_t cols() const { return dim(1); }

    std::span<double> data();
    std::span<const double> data() const;
    double* ptr() { return node_->data.data(); }
    const double* ptr() const { return node_->data.data(); }
    double item() const;
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool has_grad() const;
    std::span<const double> grad() const;
    std::span<double> mutable_grad();
    void zero_grad();

    Tensor clone() const;
    Tensor detach() const;

    Node* node() const { return node_.get(); }
    const std::shared_ptr<Node>& shared_node() const { return node_; }
    bool same_storage(const Tensor& other) const { return node_ == other.node_; }

private:
    explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
    std::shared_ptr<Node> node_;
};

/// Reverse-mode sweep from a scalar loss. Leaf grads accumulate across calls;
/// the recorded graph is released afterwards.
void backward(const Tensor& loss);

bool grad_enabled();

/// Disables graph recording for its lifetime (inference, optimizer updates).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace vitalpeft::numerics
