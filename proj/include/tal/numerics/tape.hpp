// Copyright 2026 The TAL Authors. All Rights Reserved.
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
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tal/numerics/tensor.hpp"

namespace tal {

using GradientMap = std::map<std::string, Tensor>;

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
public:
    Var() = default;
    const Tensor& value() const;
    std::size_t id() const { return id_; }
    Tape* tape() const { return tape_; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Linear record of primitive operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, which is a topological order of
/// the computation graph, so backward() is a single reverse sweep that visits
/// each node once. Gradients flowing into a node from several consumers are
/// summed. A tape built with `record = false` evaluates values only and
/// refuses backward().
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    /// Leaf whose gradient is reported by backward() under `name`.
    Var parameter(std::string name, Tensor value);
    /// Unnamed leaf that requires a gradient; read it back with grad().
    Var variable(Tensor value);

    /// Runs the reverse sweep from a scalar loss. Returns gradients of every
    /// named parameter (zero tensors for parameters the loss does not reach).
    GradientMap backward(Var loss);

    const Tensor& value(Var v) const { return nodes_[v.id()].value; }
    const Tensor& value(std::size_t id) const { return nodes_[id].value; }
    /// Gradient after backward(); an empty tensor if the node was unreachable.
    const Tensor& grad(Var v) const { return nodes_[v.id()].grad; }

    bool recording() const { return record_; }
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Sign (-1, 0, +1) of every ReLU input in recording order. Two forward
    /// passes with equal signatures lie on the same linear piece of every ReLU.
    std::vector<std::int8_t> relu_signature() const;

    // Used by primitive implementations.
    Var push(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);
    void mark_relu_input(std::size_t id) { relu_inputs_.push_back(id); }
    /// Gradient accumulator for node `id`, zero-initialized on first access.
    Tensor& grad_accumulator(std::size_t id);
    const Tensor& grad(std::size_t id) const { return nodes_[id].grad; }

private:
    struct Node {
        const char* op;
        Tensor value;
        Tensor grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        bool requires_grad = false;
    };

    bool record_;
    std::deque<Node> nodes_;
    std::vector<std::pair<std::string, std::size_t>> parameters_;
    std::vector<std::size_t> relu_inputs_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }

/// Primitive differentiable operations. All shapes are checked; a mismatch
/// throws tal::Error naming the primitive and both shapes. Rank-1 operands are
/// treated as 1 x n rows.
namespace ad {

Var matmul(Var a, Var b);                  // [m,k] x [k,n] -> [m,n]
Var add(Var a, Var b);                     // same shape
Var sub(Var a, Var b);
Var mul(Var a, Var b);                     // elementwise
Var add_bias(Var a, Var bias);             // [m,n] + [n] broadcast over rows
Var scale(Var a, double factor);
Var one_minus(Var a);                      // 1 - a
Var relu(Var a);                           // subgradient 0 at 0
Var sigmoid(Var a);
Var tanh(Var a);
Var concat_cols(std::span<const Var> parts);  // equal row counts
Var concat_rows(std::span<const Var> parts);  // equal column counts
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var table, std::span<const std::size_t> rows);  // scatter-add backward
Var scale_rows(Var a, std::span<const double> factors);         // row r times factors[r]
Var sum(Var a);                                                  // -> scalar
/// Whole GRU recurrence in one node. gates_x [steps*batch, 3H] holds the
/// input-side pre-activations (x W_ih + b_ih) in time-major rows, w_hh is
/// [H, 3H] and b_hh [3H], gate blocks ordered r | z | n:
///   r = sigmoid(gx_r + h W_hr + b_hr),  z = sigmoid(gx_z + h W_hz + b_hz)
///   n = tanh(gx_n + r * (h W_hn + b_hn)),  h' = (1 - z) * n + z * h
/// with h = 0 before the first step. Returns every state, [steps*batch, H].
Var gru_sequence(Var gates_x, Var w_hh, Var b_hh, std::size_t batch, std::size_t steps);
/// sum_r mask[r] * sum_c (pred[r,c] - target[r,c])^2 -> scalar
Var masked_sse(Var pred, const Tensor& target, std::span<const double> mask);
/// sum_r mask[r] * sum_c BCE(sigmoid(logits[r,c]), labels[r,c]) -> scalar,
/// evaluated in the overflow-free log-sum-exp form.
Var masked_bce_with_logits(Var logits, const Tensor& labels, std::span<const double> mask);

}  // namespace ad

}  // namespace tal
