/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/nn.hpp
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

/// Named trainable parameters, their binding onto autodiff tapes, simple
/// layer helpers, and the Adam optimizer.
///
/// All trainable state (values and Adam moments) is snapped to
/// float32-representable doubles after every touch, so the float32
/// checkpoint container restores it bit-exactly.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "uvmt/autodiff.hpp"
#include "uvmt/tensor.hpp"

namespace uvmt {
class Uvt1Container;
}

namespace uvmt::nn {

struct Param {
    std::string name;
    Tensor value;
    Tensor moment1;   ///< Adam first moment.
    Tensor moment2;   ///< Adam second moment.
};

/// Owns named parameters with stable addresses and registration order.
class ParamStore {
  public:
    /// Registers a parameter (duplicate names are a contract error). The
    /// initial value is float32-snapped; moments start at zero.
    Param& add(const std::string& name, Tensor init);

    bool has(const std::string& name) const;
    Param& get(const std::string& name);
    const Param& get(const std::string& name) const;

    std::size_t count() const { return params_.size(); }
    const std::vector<std::unique_ptr<Param>>& params() const { return params_; }

    /// Writes every parameter as "p:<name>" plus moments "m1:<name>",
    /// "m2:<name>" when with_moments is set.
    void save_into(Uvt1Container& container, bool with_moments) const;
    /// Restores every registered parameter from the container (missing
    /// records are an I/O error; moments load only if present).
    void load_from(const Uvt1Container& container);

  private:
    std::vector<std::unique_ptr<Param>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Per-tape binding of parameters to leaf Vars: one leaf per parameter per
/// graph, so gradients accumulate across reuse (e.g. the generator applied
/// twice inside the cycle loss).
class GraphContext {
  public:
    explicit GraphContext(ad::Tape& tape) : tape_(&tape) {}

    ad::Tape& tape() { return *tape_; }

    /// Binds a parameter as a leaf; `trainable` controls requires_grad
    /// (frozen networks pass false). Rebinding with a different
    /// trainability is a contract error.
    ad::Var use(Param& param, bool trainable = true);

    const std::vector<std::pair<Param*, ad::Var>>& bound() const { return bound_; }

  private:
    ad::Tape* tape_;
    std::vector<std::pair<Param*, ad::Var>> bound_;
    std::unordered_map<const Param*, std::size_t> cache_;
};

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    double eps = 1e-8;
};

/// One Adam update of a single parameter from an explicit gradient.
/// `step_index` is 1-based for bias correction. The updated value and
/// moments are float32-snapped.
void adam_update_one(Param& param, const Tensor& grad, const AdamConfig& config,
                     std::int64_t step_index);

/// One Adam update over the given (parameter, leaf) bindings, reading each
/// leaf's accumulated gradient and skipping frozen bindings.
void adam_step(const std::vector<std::pair<Param*, ad::Var>>& bound, const AdamConfig& config,
               std::int64_t step_index);

/// He-normal initializer: N(0, sqrt(2 / fan_in)) times `scale`.
Tensor he_normal(const std::vector<int>& shape, int fan_in, std::mt19937_64& rng,
                 double scale = 1.0);

/// A 2D convolution layer bound to two ParamStore entries.
struct Conv2dLayer {
    Param* weight = nullptr;
    Param* bias = nullptr;
    int stride = 1;
    int pad = 0;

    /// Registers "<name>.w" and "<name>.b" and returns the layer handle.
    /// `weight_scale` shrinks the init (used for near-neutral heads).
    static Conv2dLayer create(ParamStore& store, const std::string& name, int in_ch, int out_ch,
                              int kernel, int stride, int pad, std::mt19937_64& rng,
                              double weight_scale = 1.0);

    ad::Var operator()(GraphContext& ctx, const ad::Var& x, bool trainable = true) const;
};

} // namespace uvmt::nn
