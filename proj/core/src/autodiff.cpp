/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/autodiff.cpp
 *
 * Copyright 2026 The uvmt contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "uvmt/autodiff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "uvmt/uv.hpp"

namespace uvmt::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

Tape& same_tape(const Var& a, const Var& b, const char* op) {
    detail::require(a.valid() && b.valid(), std::string(op) + ": invalid operand");
    detail::require(a.tape() == b.tape(), std::string(op) + ": operands live on different tapes");
    return *a.tape();
}

Tape& tape_of(const Var& a, const char* op) {
    detail::require(a.valid(), std::string(op) + ": invalid operand");
    return *a.tape();
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    detail::require(a.value().same_shape(b.value()),
                    std::string(op) + ": shape mismatch " + shape_to_string(a.value().shape()) +
                        " vs " + shape_to_string(b.value().shape()));
}

// The id the next emplace() will assign; lets op lambdas capture their own
// output node before it exists.
int next_id(const Tape& t) { return static_cast<int>(t.node_count()); }

/// Elementwise unary op helper: forward maps x -> f(x); backward multiplies
/// the incoming gradient by df(x, y) where y is the forward output.
template <typename Fwd, typename Dfn>
Var unary_elementwise(const Var& a, const char* op, Fwd fwd, Dfn dfn) {
    Tape& t = tape_of(a, op);
    const Tensor& x = a.value();
    Tensor y(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
    if (!a.requires_grad()) return t.emplace(std::move(y), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(y), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        const Tensor& xv = tp.value_of(ia);
        const Tensor& yv = tp.value_of(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfn(xv[i], yv[i]);
    });
}

} // namespace

// --- Var ---

const Tensor& Var::value() const {
    detail::require(valid(), "Var::value: invalid handle");
    return tape_->value_of(id_);
}

bool Var::requires_grad() const {
    detail::require(valid(), "Var::requires_grad: invalid handle");
    return tape_->requires_grad_of(id_);
}

const Tensor& Var::grad() const {
    const Tensor* g = grad_if_any();
    detail::require(g != nullptr, "Var::grad: node was not reached by backward()");
    return *g;
}

const Tensor* Var::grad_if_any() const {
    detail::require(valid(), "Var::grad: invalid handle");
    return tape_->grad_ptr(id_);
}

Tensor Var::grad_or_zero() const {
    const Tensor* g = grad_if_any();
    return g != nullptr ? *g : Tensor(value().shape());
}

// --- Tape ---

Var Tape::leaf(Tensor value, bool requires_grad) {
    return emplace(std::move(value), requires_grad, nullptr);
}

Var Tape::emplace(Tensor value, bool requires_grad, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Tape::value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

bool Tape::requires_grad_of(int id) const {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
}

Tensor& Tape::grad_buffer(int id) {
    Node& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.grad_live) {
        node.grad = Tensor(node.value.shape());
        node.grad_live = true;
    }
    return node.grad;
}

const Tensor* Tape::grad_ptr(int id) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    return node.grad_live ? &node.grad : nullptr;
}

void Tape::backward(const Var& root) {
    detail::require(root.valid() && root.tape() == this, "backward: root not on this tape");
    detail::require(root.value().rank() == 0, "backward: root must be a scalar (rank 0)");
    detail::require(root.requires_grad(), "backward: root does not require gradients");
    for (Node& node : nodes_) {
        node.grad = Tensor();
        node.grad_live = false;
    }
    grad_buffer(root.id())[0] = 1.0;
    for (int i = root.id(); i >= 0; --i) {
        Node& node = nodes_[static_cast<std::size_t>(i)];
        if (!node.requires_grad || !node.grad_live || !node.backward) continue;
        node.backward(*this);
    }
}

void Tape::reset() { nodes_.clear(); }

// --- ops ---

Var detach(const Var& a) { return tape_of(a, "detach").leaf(a.value(), false); }

Var add(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "add");
    require_same_shape(a, b, "add");
    const bool ra = a.requires_grad(), rb = b.requires_grad();
    Tensor v = a.value() + b.value();
    if (!ra && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), ib = b.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        if (ra) tp.grad_buffer(ia) += g;
        if (rb) tp.grad_buffer(ib) += g;
    });
}

Var sub(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "sub");
    require_same_shape(a, b, "sub");
    const bool ra = a.requires_grad(), rb = b.requires_grad();
    Tensor v = a.value() - b.value();
    if (!ra && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), ib = b.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        if (ra) tp.grad_buffer(ia) += g;
        if (rb) tp.grad_buffer(ib) -= g;
    });
}

Var mul(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "mul");
    require_same_shape(a, b, "mul");
    const bool ra = a.requires_grad(), rb = b.requires_grad();
    Tensor v = hadamard(a.value(), b.value());
    if (!ra && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), ib = b.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        if (ra) tp.grad_buffer(ia) += hadamard(g, tp.value_of(ib));
        if (rb) tp.grad_buffer(ib) += hadamard(g, tp.value_of(ia));
    });
}

Var affine(const Var& a, double scale, double shift) {
    Tape& t = tape_of(a, "affine");
    const Tensor& x = a.value();
    Tensor v(x.shape());
    for (std::int64_t i = 0; i < x.size(); ++i) v[i] = scale * x[i] + shift;
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += scale * g[i];
    });
}

Var mul_const(const Var& a, Tensor m) {
    Tape& t = tape_of(a, "mul_const");
    detail::require(a.value().same_shape(m), "mul_const: shape mismatch");
    Tensor v = hadamard(a.value(), m);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [ia, out, m = std::move(m)](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (std::int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * m[i];
    });
}

Var relu(const Var& a) {
    return unary_elementwise(
        a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(const Var& a, double slope) {
    return unary_elementwise(
        a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
        [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var sigmoid(const Var& a) {
    return unary_elementwise(
        a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

Var abs(const Var& a) {
    return unary_elementwise(
        a, "abs", [](double x) { return std::abs(x); },
        [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var log(const Var& a) {
    return unary_elementwise(
        a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var clamp(const Var& a, double lo, double hi) {
    detail::require(lo < hi, "clamp: lo must be < hi");
    return unary_elementwise(
        a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
        [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var sum_all(const Var& a) {
    Tape& t = tape_of(a, "sum_all");
    Tensor v = Tensor::from_data({}, {a.value().sum()});
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const double g = (*tp.grad_ptr(out))[0];
        Tensor& ga = tp.grad_buffer(ia);
        for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

Var mean_all(const Var& a) {
    Tape& t = tape_of(a, "mean_all");
    detail::require(a.value().size() > 0, "mean_all: empty tensor");
    Tensor v = Tensor::from_data({}, {a.value().mean()});
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    const double inv_n = 1.0 / static_cast<double>(a.value().size());
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const double g = (*tp.grad_ptr(out))[0] * inv_n;
        Tensor& ga = tp.grad_buffer(ia);
        for (std::int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
}

Var reshape(const Var& a, const std::vector<int>& shape) {
    Tape& t = tape_of(a, "reshape");
    Tensor v = a.value().reshaped(shape);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        tp.grad_buffer(ia) += g.reshaped(tp.value_of(ia).shape());
    });
}

Var transpose2d(const Var& a) {
    Tape& t = tape_of(a, "transpose2d");
    const Tensor& x = a.value();
    detail::require(x.rank() == 2, "transpose2d: operand must be rank 2");
    const int m = x.dim(0), n = x.dim(1);
    Tensor v({n, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) v.at(j, i) = x.at(i, j);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) ga.at(i, j) += g.at(j, i);
    });
}

Var matmul(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "matmul");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    detail::require(av.rank() == 2 && bv.rank() == 2 && av.dim(1) == bv.dim(0),
                    "matmul: need m x k times k x n, got " + shape_to_string(av.shape()) + " and " +
                        shape_to_string(bv.shape()));
    const int m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    Tensor v({m, n});
    {
        ConstMapMat ma(av.data(), m, k), mb(bv.data(), k, n);
        MapMat mv(v.data(), m, n);
        mv.noalias() = ma * mb;
    }
    const bool ra = a.requires_grad(), rb = b.requires_grad();
    if (!ra && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), ib = b.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        ConstMapMat g(tp.grad_ptr(out)->data(), m, n);
        if (ra) {
            ConstMapMat mb(tp.value_of(ib).data(), k, n);
            MapMat ga(tp.grad_buffer(ia).data(), m, k);
            ga.noalias() += g * mb.transpose();
        }
        if (rb) {
            ConstMapMat ma(tp.value_of(ia).data(), m, k);
            MapMat gb(tp.grad_buffer(ib).data(), k, n);
            gb.noalias() += ma.transpose() * g;
        }
    });
}

Var softmax_rows(const Var& a) {
    Tape& t = tape_of(a, "softmax_rows");
    const Tensor& x = a.value();
    detail::require(x.rank() == 2, "softmax_rows: operand must be rank 2");
    const int m = x.dim(0), n = x.dim(1);
    Tensor v({m, n});
    for (int i = 0; i < m; ++i) {
        double row_max = x.at(i, 0);
        for (int j = 1; j < n; ++j) row_max = std::max(row_max, x.at(i, j));
        double row_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            const double e = std::exp(x.at(i, j) - row_max);
            v.at(i, j) = e;
            row_sum += e;
        }
        for (int j = 0; j < n; ++j) v.at(i, j) /= row_sum;
    }
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        const Tensor& y = tp.value_of(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (int i = 0; i < m; ++i) {
            double dot = 0.0;
            for (int j = 0; j < n; ++j) dot += g.at(i, j) * y.at(i, j);
            for (int j = 0; j < n; ++j) ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Var concat_c(const Var& a, const Var& b) {
    Tape& t = same_tape(a, b, "concat_c");
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    detail::require(av.rank() == 3 && bv.rank() == 3 && av.dim(1) == bv.dim(1) &&
                        av.dim(2) == bv.dim(2),
                    "concat_c: operands must be C x h x w with matching spatial dims");
    const int ca = av.dim(0), cb = bv.dim(0), h = av.dim(1), w = av.dim(2);
    Tensor v({ca + cb, h, w});
    // Channel is the outermost axis, so the halves are contiguous blocks.
    std::copy(av.data(), av.data() + av.size(), v.data());
    std::copy(bv.data(), bv.data() + bv.size(), v.data() + av.size());
    const bool ra = a.requires_grad(), rb = b.requires_grad();
    if (!ra && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), ib = b.id(), out = next_id(t);
    const std::int64_t na = av.size(), nb = bv.size();
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        if (ra) {
            Tensor& ga = tp.grad_buffer(ia);
            for (std::int64_t i = 0; i < na; ++i) ga[i] += g[i];
        }
        if (rb) {
            Tensor& gb = tp.grad_buffer(ib);
            for (std::int64_t i = 0; i < nb; ++i) gb[i] += g[na + i];
        }
    });
}

Var mul_bcast_c(const Var& mask, const Var& x) {
    Tape& t = same_tape(mask, x, "mul_bcast_c");
    const Tensor& mv = mask.value();
    const Tensor& xv = x.value();
    detail::require(mv.rank() == 3 && xv.rank() == 3 && mv.dim(0) == 1 && mv.dim(1) == xv.dim(1) &&
                        mv.dim(2) == xv.dim(2),
                    "mul_bcast_c: mask must be 1 x h x w matching x's spatial dims");
    const int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor v({c, h, w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) v.at(ci, i, j) = mv.at(0, i, j) * xv.at(ci, i, j);
    const bool rm = mask.requires_grad(), rx = x.requires_grad();
    if (!rm && !rx) return t.emplace(std::move(v), false, nullptr);
    const int im = mask.id(), ix = x.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        const Tensor& mval = tp.value_of(im);
        const Tensor& xval = tp.value_of(ix);
        if (rx) {
            Tensor& gx = tp.grad_buffer(ix);
            for (int ci = 0; ci < c; ++ci)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) gx.at(ci, i, j) += mval.at(0, i, j) * g.at(ci, i, j);
        }
        if (rm) {
            Tensor& gm = tp.grad_buffer(im);
            for (int ci = 0; ci < c; ++ci)
                for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) gm.at(0, i, j) += xval.at(ci, i, j) * g.at(ci, i, j);
        }
    });
}

Var flip_axis(const Var& a, int axis) {
    Tape& t = tape_of(a, "flip_axis");
    Tensor v = flip_width(a.value(), axis);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        tp.grad_buffer(ia) += flip_width(*tp.grad_ptr(out), axis);
    });
}

Var upsample_nearest2(const Var& a) {
    Tape& t = tape_of(a, "upsample_nearest2");
    const Tensor& x = a.value();
    detail::require(x.rank() == 3, "upsample_nearest2: operand must be C x h x w");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor v({c, 2 * h, 2 * w});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                const double val = x.at(ci, i, j);
                v.at(ci, 2 * i, 2 * j) = val;
                v.at(ci, 2 * i, 2 * j + 1) = val;
                v.at(ci, 2 * i + 1, 2 * j) = val;
                v.at(ci, 2 * i + 1, 2 * j + 1) = val;
            }
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (int ci = 0; ci < c; ++ci)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    ga.at(ci, i, j) += g.at(ci, 2 * i, 2 * j) + g.at(ci, 2 * i, 2 * j + 1) +
                                       g.at(ci, 2 * i + 1, 2 * j) + g.at(ci, 2 * i + 1, 2 * j + 1);
    });
}

namespace {

/// Unfolds conv input patches into a (C_in*kh*kw) x (H_out*W_out) matrix.
Tensor im2col(const Tensor& x, int kh, int kw, int stride, int pad, int h_out, int w_out) {
    const int c_in = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor col({c_in * kh * kw, h_out * w_out});
    for (int ci = 0; ci < c_in; ++ci)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj) {
                const int row = (ci * kh + ki) * kw + kj;
                for (int oy = 0; oy < h_out; ++oy) {
                    const int iy = oy * stride + ki - pad;
                    for (int ox = 0; ox < w_out; ++ox) {
                        const int ix = ox * stride + kj - pad;
                        col.at(row, oy * w_out + ox) =
                            (iy >= 0 && iy < h && ix >= 0 && ix < w) ? x.at(ci, iy, ix) : 0.0;
                    }
                }
            }
    return col;
}

/// Transpose of im2col: scatters column-space gradients back onto the input.
void col2im_add(const Tensor& dcol, Tensor& dx, int kh, int kw, int stride, int pad, int h_out,
                int w_out) {
    const int c_in = dx.dim(0), h = dx.dim(1), w = dx.dim(2);
    for (int ci = 0; ci < c_in; ++ci)
        for (int ki = 0; ki < kh; ++ki)
            for (int kj = 0; kj < kw; ++kj) {
                const int row = (ci * kh + ki) * kw + kj;
                for (int oy = 0; oy < h_out; ++oy) {
                    const int iy = oy * stride + ki - pad;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < w_out; ++ox) {
                        const int ix = ox * stride + kj - pad;
                        if (ix < 0 || ix >= w) continue;
                        dx.at(ci, iy, ix) += dcol.at(row, oy * w_out + ox);
                    }
                }
            }
}

} // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
    Tape& t = same_tape(x, w, "conv2d");
    same_tape(x, b, "conv2d");
    const Tensor& xv = x.value();
    const Tensor& wv = w.value();
    const Tensor& bv = b.value();
    detail::require(xv.rank() == 3, "conv2d: input must be C_in x H x W");
    detail::require(wv.rank() == 4, "conv2d: weights must be C_out x C_in x kh x kw");
    detail::require(bv.rank() == 1 && bv.dim(0) == wv.dim(0),
                    "conv2d: bias must be a C_out vector");
    detail::require(xv.dim(0) == wv.dim(1), "conv2d: channel mismatch between input and weights");
    detail::require(stride >= 1 && pad >= 0, "conv2d: bad stride/padding");
    const int c_out = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
    const int h = xv.dim(1), wd = xv.dim(2);
    detail::require(h + 2 * pad >= kh && wd + 2 * pad >= kw, "conv2d: kernel larger than input");
    const int h_out = (h + 2 * pad - kh) / stride + 1;
    const int w_out = (wd + 2 * pad - kw) / stride + 1;
    const int k = xv.dim(0) * kh * kw;
    const int n = h_out * w_out;

    Tensor col = im2col(xv, kh, kw, stride, pad, h_out, w_out);
    Tensor v({c_out, h_out, w_out});
    {
        ConstMapMat wm(wv.data(), c_out, k);
        ConstMapMat cm(col.data(), k, n);
        MapMat vm(v.data(), c_out, n);
        vm.noalias() = wm * cm;
        for (int co = 0; co < c_out; ++co) vm.row(co).array() += bv.at(co);
    }

    const bool rx = x.requires_grad(), rw = w.requires_grad(), rb = b.requires_grad();
    if (!rx && !rw && !rb) return t.emplace(std::move(v), false, nullptr);
    const int ix = x.id(), iw = w.id(), ib = b.id(), out = next_id(t);
    return t.emplace(
        std::move(v), true,
        [=, col = std::move(col)](Tape& tp) {
            ConstMapMat g(tp.grad_ptr(out)->data(), c_out, n);
            if (rb) {
                Tensor& gb = tp.grad_buffer(ib);
                for (int co = 0; co < c_out; ++co) gb.at(co) += g.row(co).sum();
            }
            if (rw) {
                ConstMapMat cm(col.data(), k, n);
                MapMat gw(tp.grad_buffer(iw).data(), c_out, k);
                gw.noalias() += g * cm.transpose();
            }
            if (rx) {
                ConstMapMat wm(tp.value_of(iw).data(), c_out, k);
                Tensor dcol({k, n});
                MapMat dcm(dcol.data(), k, n);
                dcm.noalias() = wm.transpose() * g;
                col2im_add(dcol, tp.grad_buffer(ix), kh, kw, stride, pad, h_out, w_out);
            }
        });
}

Var raster_apply(const Var& uv_hwc, const RasterMap& map, double background) {
    Tape& t = tape_of(uv_hwc, "raster_apply");
    Tensor v = apply_raster_map(map, uv_hwc.value(), background);
    if (!uv_hwc.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = uv_hwc.id(), out = next_id(t);
    const RasterMap* mp = &map;
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        tp.grad_buffer(ia) += raster_map_backward(*mp, *tp.grad_ptr(out));
    });
}

Var chw_to_hwc(const Var& a) {
    Tape& t = tape_of(a, "chw_to_hwc");
    const Tensor& x = a.value();
    detail::require(x.rank() == 3, "chw_to_hwc: operand must be rank 3");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor v({h, w, c});
    for (int ci = 0; ci < c; ++ci)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) v.at(i, j, ci) = x.at(ci, i, j);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (int ci = 0; ci < c; ++ci)
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) ga.at(ci, i, j) += g.at(i, j, ci);
    });
}

Var hwc_to_chw(const Var& a) {
    Tape& t = tape_of(a, "hwc_to_chw");
    const Tensor& x = a.value();
    detail::require(x.rank() == 3, "hwc_to_chw: operand must be rank 3");
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    Tensor v({c, h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            for (int ci = 0; ci < c; ++ci) v.at(ci, i, j) = x.at(i, j, ci);
    if (!a.requires_grad()) return t.emplace(std::move(v), false, nullptr);
    const int ia = a.id(), out = next_id(t);
    return t.emplace(std::move(v), true, [=](Tape& tp) {
        const Tensor& g = *tp.grad_ptr(out);
        Tensor& ga = tp.grad_buffer(ia);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j)
                for (int ci = 0; ci < c; ++ci) ga.at(i, j, ci) += g.at(ci, i, j);
    });
}

} // namespace uvmt::ad
