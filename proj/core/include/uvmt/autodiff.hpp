/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/autodiff.hpp
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
#pragma once

/// Tape-based reverse-mode automatic differentiation over dense double
/// tensors. A Tape owns the nodes of one computation graph; Vars are cheap
/// handles into it. Node creation order is a topological order, so
/// backward() is a single reverse sweep. Graphs are rebuilt per training
/// step and the tape is dropped afterwards.

#include <functional>
#include <vector>

#include "uvmt/tensor.hpp"

namespace uvmt {
struct RasterMap;
}

namespace uvmt::ad {

class Tape;

/// Handle to a node on a Tape. Default-constructed Vars are invalid.
class Var {
  public:
    Var() = default;

    bool valid() const { return tape_ != nullptr; }
    int id() const { return id_; }
    Tape* tape() const { return tape_; }

    const Tensor& value() const;
    bool requires_grad() const;

    /// Gradient accumulated by the last backward(); throws if this node was
    /// never reached.
    const Tensor& grad() const;
    /// Gradient if the node was reached by backward(), else nullptr.
    const Tensor* grad_if_any() const;
    /// Gradient, or a zero tensor of the node's shape if never reached.
    Tensor grad_or_zero() const;

  private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

class Tape {
  public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers an input tensor. Parameters pass requires_grad = true.
    Var leaf(Tensor value, bool requires_grad = false);

    /// Reverse sweep from a scalar (rank-0) root.
    void backward(const Var& root);

    void reset();
    std::size_t node_count() const { return nodes_.size(); }

    // --- internals used by the op free functions ---
    using BackwardFn = std::function<void(Tape&)>;
    Var emplace(Tensor value, bool requires_grad, BackwardFn backward);
    const Tensor& value_of(int id) const;
    bool requires_grad_of(int id) const;
    /// Lazily allocated gradient accumulator for a node.
    Tensor& grad_buffer(int id);
    const Tensor* grad_ptr(int id) const;

  private:
    struct Node {
        Tensor value;
        Tensor grad;          ///< empty until touched by backward.
        bool requires_grad = false;
        bool grad_live = false;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
};

/// Re-registers a value as a constant leaf on the same tape (gradient stops
/// here).
Var detach(const Var& a);

// Elementwise ops (shapes must match exactly).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

/// scale * a + shift, elementwise with scalars.
Var affine(const Var& a, double scale, double shift);
/// Elementwise product with a constant tensor of identical shape.
Var mul_const(const Var& a, Tensor m);

Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var sigmoid(const Var& a);
Var abs(const Var& a);
Var log(const Var& a);
/// Derivative is 1 strictly inside (lo, hi), 0 elsewhere.
Var clamp(const Var& a, double lo, double hi);

Var sum_all(const Var& a);   ///< rank-0 result.
Var mean_all(const Var& a);  ///< rank-0 result.

Var reshape(const Var& a, const std::vector<int>& shape);
Var transpose2d(const Var& a);
/// a: m x k, b: k x n -> m x n.
Var matmul(const Var& a, const Var& b);
/// Row-wise softmax of an m x n matrix (numerically shifted by row max).
Var softmax_rows(const Var& a);

/// Concatenates two C x h x w maps along the channel axis.
Var concat_c(const Var& a, const Var& b);
/// mask: 1 x h x w broadcast over the channels of x: C x h x w.
Var mul_bcast_c(const Var& mask, const Var& x);
/// Reverses one axis; the extent must be even (mirror flip).
Var flip_axis(const Var& a, int axis);
/// C x h x w -> C x 2h x 2w nearest-neighbour upsampling.
Var upsample_nearest2(const Var& a);

/// x: C_in x H x W, w: C_out x C_in x kh x kw, b: C_out. Zero padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

/// Renders an R x R x C UV tensor through a precomputed RasterMap. The map
/// must outlive the tape (it is captured by pointer).
Var raster_apply(const Var& uv_hwc, const RasterMap& map, double background = 0.0);

// Layout permutations between image (H,W,C) and network (C,H,W) order.
Var chw_to_hwc(const Var& a);
Var hwc_to_chw(const Var& a);

} // namespace uvmt::ad
