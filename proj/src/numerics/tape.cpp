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

#include "tal/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "tal/common.hpp"

namespace tal {

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{"constant", std::move(value), {}, {}, {}, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(std::string name, Tensor value) {
    nodes_.push_back(Node{"parameter", std::move(value), {}, {}, {}, record_});
    parameters_.emplace_back(std::move(name), nodes_.size() - 1);
    return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
    nodes_.push_back(Node{"variable", std::move(value), {}, {}, {}, record_});
    return Var(this, nodes_.size() - 1);
}

Var Tape::push(const char* op, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    bool needs = false;
    if (record_) {
        for (std::size_t id : inputs) needs = needs || nodes_[id].requires_grad;
    }
    Node node{op, std::move(value), {}, {}, {}, needs};
    if (needs) {
        node.inputs = std::move(inputs);
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_accumulator(std::size_t id) {
    Node& node = nodes_[id];
    if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
    return node.grad;
}

GradientMap Tape::backward(Var loss) {
    if (!record_) throw Error("backward: tape was built without gradient recording");
    if (loss.tape() != this) throw Error("backward: loss belongs to a different tape");
    const Tensor& loss_value = value(loss);
    if (loss_value.size() != 1) {
        throw Error("backward: loss must be scalar, got shape " + loss_value.shape_string());
    }
    for (auto& node : nodes_) node.grad = Tensor();
    grad_accumulator(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (!node.requires_grad || node.grad.empty() || !node.backward) continue;
        node.backward(*this, i);
    }
    GradientMap grads;
    for (const auto& [name, id] : parameters_) {
        const Node& node = nodes_[id];
        Tensor g = node.grad.empty() ? Tensor(node.value.shape(), 0.0) : node.grad;
        auto [it, inserted] = grads.emplace(name, std::move(g));
        if (!inserted) throw Error("backward: parameter '" + name + "' registered twice");
    }
    return grads;
}

std::vector<std::int8_t> Tape::relu_signature() const {
    std::vector<std::int8_t> signs;
    for (std::size_t id : relu_inputs_) {
        for (double v : nodes_[id].value.values()) {
            signs.push_back(static_cast<std::int8_t>((v > 0.0) - (v < 0.0)));
        }
    }
    return signs;
}

namespace ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw Error(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

void check_same_tape(const char* op, Var a, Var b) {
    if (a.tape() == nullptr || a.tape() != b.tape()) {
        throw Error(std::string(op) + ": operands recorded on different tapes");
    }
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

double sigmoid_value(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor like(const Tensor& t) { return Tensor({t.rows(), t.cols()}, 0.0); }

template <typename Fn>
Var unary(const char* op, Var a, Fn&& forward_fn,
          std::function<double(double x, double y)> derivative) {
    Tape& tape = *a.tape();
    const Tensor& x = tape.value(a);
    Tensor y = like(x);
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = forward_fn(x[i]);
    const std::size_t ia = a.id();
    return tape.push(op, std::move(y), {ia},
                     [ia, derivative = std::move(derivative)](Tape& t, std::size_t self) {
                         const Tensor& g = t.grad(self);
                         const Tensor& xv = t.value(ia);
                         const Tensor& yv = t.value(self);
                         Tensor& ga = t.grad_accumulator(ia);
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             ga[i] += g[i] * derivative(xv[i], yv[i]);
                         }
                     });
}

}  // namespace

Var matmul(Var a, Var b) {
    check_same_tape("matmul", a, b);
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    const Tensor& B = tape.value(b);
    const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
    if (B.rows() != k) shape_error("matmul", A, B);
    Tensor C = Tensor::matrix(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double* __restrict c = &C(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = A(i, p);
            if (av == 0.0) continue;
            const double* __restrict brow = &B(p, 0);
            for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
        }
    }
    const std::size_t ia = a.id(), ib = b.id();
    return tape.push("matmul", std::move(C), {ia, ib}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
        const Tensor& G = t.grad(self);
        if (t.requires_grad(ia)) {
            // GA += G * B^T, accumulated row by row against B^T so the inner
            // loop is a contiguous axpy.
            const Tensor& Bv = t.value(ib);
            std::vector<double> bt(n * k);
            for (std::size_t p = 0; p < k; ++p) {
                for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = Bv[p * n + j];
            }
            Tensor& GA = t.grad_accumulator(ia);
            for (std::size_t i = 0; i < m; ++i) {
                const double* g = &G(i, 0);
                double* __restrict ga = &GA[i * k];
                for (std::size_t j = 0; j < n; ++j) {
                    const double gv = g[j];
                    if (gv == 0.0) continue;
                    const double* __restrict btrow = &bt[j * k];
                    for (std::size_t p = 0; p < k; ++p) ga[p] += gv * btrow[p];
                }
            }
        }
        if (t.requires_grad(ib)) {
            const Tensor& Av = t.value(ia);
            Tensor& GB = t.grad_accumulator(ib);
            for (std::size_t i = 0; i < m; ++i) {
                const double* g = &G(i, 0);
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = Av[i * k + p];
                    if (av == 0.0) continue;
                    double* __restrict gb = &GB[p * n];
                    for (std::size_t j = 0; j < n; ++j) gb[j] += av * g[j];
                }
            }
        }
    });
}

Var add(Var a, Var b) {
    check_same_tape("add", a, b);
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    const Tensor& B = tape.value(b);
    check_same_shape("add", A, B);
    Tensor C = like(A);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] + B[i];
    const std::size_t ia = a.id(), ib = b.id();
    return tape.push("add", std::move(C), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t in : {ia, ib}) {
            if (!t.requires_grad(in)) continue;
            Tensor& gi = t.grad_accumulator(in);
            for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
        }
    });
}

Var sub(Var a, Var b) {
    check_same_tape("sub", a, b);
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    const Tensor& B = tape.value(b);
    check_same_shape("sub", A, B);
    Tensor C = like(A);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] - B[i];
    const std::size_t ia = a.id(), ib = b.id();
    return tape.push("sub", std::move(C), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ia)) {
            Tensor& ga = t.grad_accumulator(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(ib)) {
            Tensor& gb = t.grad_accumulator(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
        }
    });
}

Var mul(Var a, Var b) {
    check_same_tape("mul", a, b);
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    const Tensor& B = tape.value(b);
    check_same_shape("mul", A, B);
    Tensor C = like(A);
    for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * B[i];
    const std::size_t ia = a.id(), ib = b.id();
    return tape.push("mul", std::move(C), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ia)) {
            const Tensor& Bv = t.value(ib);
            Tensor& ga = t.grad_accumulator(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * Bv[i];
        }
        if (t.requires_grad(ib)) {
            const Tensor& Av = t.value(ia);
            Tensor& gb = t.grad_accumulator(ib);
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * Av[i];
        }
    });
}

Var add_bias(Var a, Var bias) {
    check_same_tape("add_bias", a, bias);
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    const Tensor& b = tape.value(bias);
    if (b.size() != A.cols()) shape_error("add_bias", A, b);
    Tensor C = like(A);
    const std::size_t m = A.rows(), n = A.cols();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) C(i, j) = A(i, j) + b[j];
    }
    const std::size_t ia = a.id(), ib = bias.id();
    return tape.push("add_bias", std::move(C), {ia, ib}, [ia, ib, m, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        if (t.requires_grad(ia)) {
            Tensor& ga = t.grad_accumulator(ia);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (t.requires_grad(ib)) {
            Tensor& gb = t.grad_accumulator(ib);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
            }
        }
    });
}

Var scale(Var a, double factor) {
    return unary(
        "scale", a, [factor](double x) { return factor * x; },
        [factor](double, double) { return factor; });
}

Var one_minus(Var a) {
    return unary(
        "one_minus", a, [](double x) { return 1.0 - x; }, [](double, double) { return -1.0; });
}

Var relu(Var a) {
    a.tape()->mark_relu_input(a.id());
    return unary(
        "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
    return unary(
        "sigmoid", a, sigmoid_value,
        [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
    return unary(
        "tanh", a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw Error("concat_cols: no operands");
    Tape& tape = *parts[0].tape();
    const std::size_t m = tape.value(parts[0]).rows();
    std::vector<std::size_t> ids, offsets, widths;
    std::size_t total = 0;
    for (Var p : parts) {
        check_same_tape("concat_cols", parts[0], p);
        const Tensor& v = tape.value(p);
        if (v.rows() != m) shape_error("concat_cols", tape.value(parts[0]), v);
        ids.push_back(p.id());
        offsets.push_back(total);
        widths.push_back(v.cols());
        total += v.cols();
    }
    Tensor C = Tensor::matrix(m, total);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Tensor& v = tape.value(ids[k]);
        for (std::size_t i = 0; i < m; ++i) {
            std::copy_n(&v[i * widths[k]], widths[k], &C(i, offsets[k]));
        }
    }
    return tape.push("concat_cols", std::move(C), ids,
                     [ids, offsets, widths, m, total](Tape& t, std::size_t self) {
                         const Tensor& g = t.grad(self);
                         for (std::size_t k = 0; k < ids.size(); ++k) {
                             if (!t.requires_grad(ids[k])) continue;
                             Tensor& gi = t.grad_accumulator(ids[k]);
                             for (std::size_t i = 0; i < m; ++i) {
                                 for (std::size_t j = 0; j < widths[k]; ++j) {
                                     gi[i * widths[k] + j] += g[i * total + offsets[k] + j];
                                 }
                             }
                         }
                     });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw Error("concat_rows: no operands");
    Tape& tape = *parts[0].tape();
    const std::size_t n = tape.value(parts[0]).cols();
    std::vector<std::size_t> ids, offsets;
    std::size_t total = 0;
    for (Var p : parts) {
        check_same_tape("concat_rows", parts[0], p);
        const Tensor& v = tape.value(p);
        if (v.cols() != n) shape_error("concat_rows", tape.value(parts[0]), v);
        ids.push_back(p.id());
        offsets.push_back(total * n);
        total += v.rows();
    }
    Tensor C = Tensor::matrix(total, n);
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Tensor& v = tape.value(ids[k]);
        std::copy(v.values().begin(), v.values().end(), C.values().begin() + offsets[k]);
    }
    return tape.push("concat_rows", std::move(C), ids, [ids, offsets](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (!t.requires_grad(ids[k])) continue;
            Tensor& gi = t.grad_accumulator(ids[k]);
            for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[offsets[k] + i];
        }
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    if (begin + count > A.rows() || count == 0) {
        throw Error("slice_rows: rows [" + std::to_string(begin) + ", " +
                    std::to_string(begin + count) + ") out of range for " + A.shape_string());
    }
    const std::size_t n = A.cols();
    Tensor C = Tensor::matrix(count, n);
    std::copy_n(&A[begin * n], count * n, C.values().begin());
    const std::size_t ia = a.id();
    return tape.push("slice_rows", std::move(C), {ia}, [ia, begin, n](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_accumulator(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[begin * n + i] += g[i];
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    if (begin + count > A.cols() || count == 0) {
        throw Error("slice_cols: columns [" + std::to_string(begin) + ", " +
                    std::to_string(begin + count) + ") out of range for " + A.shape_string());
    }
    const std::size_t m = A.rows(), n = A.cols();
    Tensor C = Tensor::matrix(m, count);
    for (std::size_t i = 0; i < m; ++i) std::copy_n(&A[i * n + begin], count, &C(i, 0));
    const std::size_t ia = a.id();
    return tape.push("slice_cols", std::move(C), {ia},
                     [ia, begin, count, m, n](Tape& t, std::size_t self) {
                         const Tensor& g = t.grad(self);
                         Tensor& ga = t.grad_accumulator(ia);
                         for (std::size_t i = 0; i < m; ++i) {
                             for (std::size_t j = 0; j < count; ++j) {
                                 ga[i * n + begin + j] += g[i * count + j];
                             }
                         }
                     });
}

Var gather_rows(Var table, std::span<const std::size_t> rows) {
    Tape& tape = *table.tape();
    const Tensor& T = tape.value(table);
    const std::size_t n = T.cols();
    std::vector<std::size_t> index(rows.begin(), rows.end());
    Tensor C = Tensor::matrix(index.size(), n);
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= T.rows()) {
            throw Error("gather_rows: row " + std::to_string(index[i]) + " out of range for " +
                        T.shape_string());
        }
        std::copy_n(&T[index[i] * n], n, &C(i, 0));
    }
    const std::size_t it = table.id();
    return tape.push("gather_rows", std::move(C), {it},
                     [it, n, index = std::move(index)](Tape& t, std::size_t self) {
                         const Tensor& g = t.grad(self);
                         Tensor& gt = t.grad_accumulator(it);
                         for (std::size_t i = 0; i < index.size(); ++i) {
                             for (std::size_t j = 0; j < n; ++j) gt[index[i] * n + j] += g[i * n + j];
                         }
                     });
}

Var gru_sequence(Var gates_x, Var w_hh, Var b_hh, std::size_t batch, std::size_t steps) {
    check_same_tape("gru_sequence", gates_x, w_hh);
    check_same_tape("gru_sequence", gates_x, b_hh);
    Tape& tape = *gates_x.tape();
    const Tensor& GX = tape.value(gates_x);
    const Tensor& W = tape.value(w_hh);
    const Tensor& B = tape.value(b_hh);
    const std::size_t h = W.rows();
    const std::size_t g3 = 3 * h;
    if (W.cols() != g3) shape_error("gru_sequence", W, B);
    if (B.size() != g3) shape_error("gru_sequence", W, B);
    if (GX.cols() != g3 || GX.rows() != batch * steps) shape_error("gru_sequence", GX, W);

    // Per row of the output: r, z, n and the recurrent candidate term
    // (h W_hn + b_hn), kept for the backward sweep.
    const std::size_t rows = batch * steps;
    auto saved = std::make_shared<std::vector<double>>(rows * 4 * h);
    Tensor H = Tensor::matrix(rows, h);
    std::vector<double> gh(batch * g3);
    const double* w = W.values().data();
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t b = 0; b < batch; ++b) {
            double* __restrict acc = &gh[b * g3];
            for (std::size_t c = 0; c < g3; ++c) acc[c] = B[c];
            if (t == 0) continue;
            const double* prev = &H((t - 1) * batch + b, 0);
            for (std::size_t p = 0; p < h; ++p) {
                const double hv = prev[p];
                if (hv == 0.0) continue;
                const double* __restrict wrow = w + p * g3;
                for (std::size_t c = 0; c < g3; ++c) acc[c] += hv * wrow[c];
            }
        }
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t row = t * batch + b;
            const double* gx = &GX(row, 0);
            const double* ghb = &gh[b * g3];
            double* sv = &(*saved)[row * 4 * h];
            double* out = &H(row, 0);
            for (std::size_t j = 0; j < h; ++j) {
                const double r = sigmoid_value(gx[j] + ghb[j]);
                const double z = sigmoid_value(gx[h + j] + ghb[h + j]);
                const double n = std::tanh(gx[2 * h + j] + r * ghb[2 * h + j]);
                const double prev = t == 0 ? 0.0 : H((t - 1) * batch + b, j);
                out[j] = (1.0 - z) * n + z * prev;
                sv[j] = r;
                sv[h + j] = z;
                sv[2 * h + j] = n;
                sv[3 * h + j] = ghb[2 * h + j];
            }
        }
    }

    const std::size_t ix = gates_x.id(), iw = w_hh.id(), ib = b_hh.id();
    return tape.push("gru_sequence", std::move(H), {ix, iw, ib},
                     [ix, iw, ib, batch, steps, h, g3, saved](Tape& t, std::size_t self) {
        const Tensor& G = t.grad(self);
        const Tensor& Hv = t.value(self);
        const Tensor& Wv = t.value(iw);
        const bool need_x = t.requires_grad(ix);
        const bool need_w = t.requires_grad(iw);
        const bool need_b = t.requires_grad(ib);
        Tensor* GX = need_x ? &t.grad_accumulator(ix) : nullptr;
        Tensor* GW = need_w ? &t.grad_accumulator(iw) : nullptr;
        Tensor* GB = need_b ? &t.grad_accumulator(ib) : nullptr;
        // W_hh^T so that dh_prev += dgh W^T runs as contiguous axpys.
        std::vector<double> wt(g3 * h);
        for (std::size_t p = 0; p < h; ++p) {
            for (std::size_t c = 0; c < g3; ++c) wt[c * h + p] = Wv[p * g3 + c];
        }
        std::vector<double> carry(batch * h, 0.0);
        std::vector<double> dgh(g3);
        std::vector<double> dgx(g3);
        for (std::size_t step = steps; step-- > 0;) {
            for (std::size_t b = 0; b < batch; ++b) {
                const std::size_t row = step * batch + b;
                const double* sv = &(*saved)[row * 4 * h];
                const double* g = &G(row, 0);
                double* dh_carry = &carry[b * h];
                const double* prev = step == 0 ? nullptr : &Hv((step - 1) * batch + b, 0);
                for (std::size_t j = 0; j < h; ++j) {
                    const double r = sv[j], z = sv[h + j], n = sv[2 * h + j], ghn = sv[3 * h + j];
                    const double hp = prev ? prev[j] : 0.0;
                    const double dh = g[j] + dh_carry[j];
                    const double dn_pre = dh * (1.0 - z) * (1.0 - n * n);
                    const double dz_pre = dh * (hp - n) * z * (1.0 - z);
                    const double dr_pre = dn_pre * ghn * r * (1.0 - r);
                    dgx[j] = dr_pre;
                    dgx[h + j] = dz_pre;
                    dgx[2 * h + j] = dn_pre;
                    dgh[j] = dr_pre;
                    dgh[h + j] = dz_pre;
                    dgh[2 * h + j] = dn_pre * r;
                    dh_carry[j] = dh * z;
                }
                if (GX) {
                    double* gxrow = &(*GX)[row * g3];
                    for (std::size_t c = 0; c < g3; ++c) gxrow[c] += dgx[c];
                }
                if (GB) {
                    for (std::size_t c = 0; c < g3; ++c) (*GB)[c] += dgh[c];
                }
                if (step == 0) continue;
                if (GW) {
                    for (std::size_t p = 0; p < h; ++p) {
                        const double hv = prev[p];
                        if (hv == 0.0) continue;
                        double* __restrict gw = &(*GW)[p * g3];
                        for (std::size_t c = 0; c < g3; ++c) gw[c] += hv * dgh[c];
                    }
                }
                for (std::size_t c = 0; c < g3; ++c) {
                    const double d = dgh[c];
                    if (d == 0.0) continue;
                    const double* __restrict wtrow = &wt[c * h];
                    for (std::size_t p = 0; p < h; ++p) dh_carry[p] += d * wtrow[p];
                }
            }
        }
    });
}

Var scale_rows(Var a, std::span<const double> factors) {
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    if (factors.size() != A.rows()) {
        throw Error("scale_rows: " + std::to_string(factors.size()) + " factors for " +
                    A.shape_string());
    }
    const std::size_t n = A.cols();
    std::vector<double> f(factors.begin(), factors.end());
    Tensor C = like(A);
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < n; ++j) C(i, j) = f[i] * A(i, j);
    }
    const std::size_t ia = a.id();
    return tape.push("scale_rows", std::move(C), {ia}, [ia, n, f = std::move(f)](Tape& t, std::size_t self) {
        const Tensor& g = t.grad(self);
        Tensor& ga = t.grad_accumulator(ia);
        for (std::size_t i = 0; i < f.size(); ++i) {
            for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += f[i] * g[i * n + j];
        }
    });
}

Var sum(Var a) {
    Tape& tape = *a.tape();
    const Tensor& A = tape.value(a);
    double total = 0.0;
    for (double v : A.values()) total += v;
    const std::size_t ia = a.id();
    return tape.push("sum", Tensor::scalar(total), {ia}, [ia](Tape& t, std::size_t self) {
        const double g = t.grad(self)[0];
        Tensor& ga = t.grad_accumulator(ia);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

Var masked_sse(Var pred, const Tensor& target, std::span<const double> mask) {
    Tape& tape = *pred.tape();
    const Tensor& P = tape.value(pred);
    check_same_shape("masked_sse", P, target);
    if (mask.size() != P.rows()) {
        throw Error("masked_sse: mask length " + std::to_string(mask.size()) + " for " +
                    P.shape_string());
    }
    const std::size_t n = P.cols();
    std::vector<double> residual(P.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < P.rows(); ++i) {
        if (mask[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            const double r = P(i, j) - target(i, j);
            residual[i * n + j] = mask[i] * r;
            total += mask[i] * r * r;
        }
    }
    const std::size_t ip = pred.id();
    return tape.push("masked_sse", Tensor::scalar(total), {ip},
                     [ip, residual = std::move(residual)](Tape& t, std::size_t self) {
                         const double g = t.grad(self)[0];
                         Tensor& gp = t.grad_accumulator(ip);
                         for (std::size_t i = 0; i < residual.size(); ++i) gp[i] += 2.0 * g * residual[i];
                     });
}

Var masked_bce_with_logits(Var logits, const Tensor& labels, std::span<const double> mask) {
    Tape& tape = *logits.tape();
    const Tensor& X = tape.value(logits);
    check_same_shape("masked_bce_with_logits", X, labels);
    if (mask.size() != X.rows()) {
        throw Error("masked_bce_with_logits: mask length " + std::to_string(mask.size()) + " for " +
                    X.shape_string());
    }
    const std::size_t n = X.cols();
    std::vector<double> dlogit(X.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
        if (mask[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            const double x = X(i, j), y = labels(i, j);
            // max(x, 0) - x*y + log(1 + exp(-|x|))
            total += mask[i] * (std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x))));
            const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                      : std::exp(x) / (1.0 + std::exp(x));
            dlogit[i * n + j] = mask[i] * (p - y);
        }
    }
    const std::size_t il = logits.id();
    return tape.push("masked_bce_with_logits", Tensor::scalar(total), {il},
                     [il, dlogit = std::move(dlogit)](Tape& t, std::size_t self) {
                         const double g = t.grad(self)[0];
                         Tensor& gl = t.grad_accumulator(il);
                         for (std::size_t i = 0; i < dlogit.size(); ++i) gl[i] += g * dlogit[i];
                     });
}

}  // namespace ad

}  // namespace tal
