/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/nn.cpp
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
#include "uvmt/nn.hpp"

#include <cmath>

#include "uvmt/container.hpp"

namespace uvmt::nn {

Param& ParamStore::add(const std::string& name, Tensor init) {
    detail::require(!name.empty(), "ParamStore::add: empty name");
    detail::require(index_.find(name) == index_.end(),
                    "ParamStore::add: duplicate parameter '" + name + "'");
    auto param = std::make_unique<Param>();
    param->name = name;
    param->value = std::move(init);
    param->value.snap_to_float32();
    param->moment1 = Tensor(param->value.shape());
    param->moment2 = Tensor(param->value.shape());
    index_.emplace(name, params_.size());
    params_.push_back(std::move(param));
    return *params_.back();
}

bool ParamStore::has(const std::string& name) const { return index_.find(name) != index_.end(); }

Param& ParamStore::get(const std::string& name) {
    auto it = index_.find(name);
    detail::require(it != index_.end(), "ParamStore::get: unknown parameter '" + name + "'");
    return *params_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    detail::require(it != index_.end(), "ParamStore::get: unknown parameter '" + name + "'");
    return *params_[it->second];
}

void ParamStore::save_into(Uvt1Container& container, bool with_moments) const {
    for (const auto& p : params_) {
        container.add_f32("p:" + p->name, p->value);
        if (with_moments) {
            container.add_f32("m1:" + p->name, p->moment1);
            container.add_f32("m2:" + p->name, p->moment2);
        }
    }
}

void ParamStore::load_from(const Uvt1Container& container) {
    for (const auto& p : params_) {
        Tensor value = container.get_tensor("p:" + p->name);
        detail::require(value.shape() == p->value.shape(),
                        "ParamStore::load_from: shape mismatch for '" + p->name + "'");
        p->value = std::move(value);
        if (container.has("m1:" + p->name)) p->moment1 = container.get_tensor("m1:" + p->name);
        if (container.has("m2:" + p->name)) p->moment2 = container.get_tensor("m2:" + p->name);
    }
}

ad::Var GraphContext::use(Param& param, bool trainable) {
    auto it = cache_.find(&param);
    if (it != cache_.end()) {
        const ad::Var cached = bound_[it->second].second;
        detail::require(cached.requires_grad() == trainable,
                        "GraphContext::use: parameter '" + param.name +
                            "' rebound with different trainability");
        return cached;
    }
    const ad::Var var = tape_->leaf(param.value, trainable);
    cache_.emplace(&param, bound_.size());
    bound_.emplace_back(&param, var);
    return var;
}

void adam_update_one(Param& param, const Tensor& grad, const AdamConfig& config,
                     std::int64_t step_index) {
    detail::require(step_index >= 1, "adam update: step_index is 1-based");
    detail::require(grad.same_shape(param.value), "adam update: gradient shape mismatch");
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_index));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_index));
    Tensor& m = param.moment1;
    Tensor& v = param.moment2;
    Tensor& x = param.value;
    for (std::int64_t i = 0; i < x.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        x[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
    x.snap_to_float32();
    m.snap_to_float32();
    v.snap_to_float32();
}

void adam_step(const std::vector<std::pair<Param*, ad::Var>>& bound, const AdamConfig& config,
               std::int64_t step_index) {
    for (const auto& [param, var] : bound) {
        if (!var.requires_grad()) continue;
        adam_update_one(*param, var.grad_or_zero(), config, step_index);
    }
}

Tensor he_normal(const std::vector<int>& shape, int fan_in, std::mt19937_64& rng, double scale) {
    detail::require(fan_in > 0, "he_normal: fan_in must be positive");
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    Tensor t(shape);
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = scale * dist(rng);
    return t;
}

Conv2dLayer Conv2dLayer::create(ParamStore& store, const std::string& name, int in_ch, int out_ch,
                                int kernel, int stride, int pad, std::mt19937_64& rng,
                                double weight_scale) {
    detail::require(in_ch > 0 && out_ch > 0 && kernel > 0, "Conv2dLayer: bad dimensions");
    Conv2dLayer layer;
    layer.weight = &store.add(name + ".w", he_normal({out_ch, in_ch, kernel, kernel},
                                                     in_ch * kernel * kernel, rng, weight_scale));
    layer.bias = &store.add(name + ".b", Tensor({out_ch}));
    layer.stride = stride;
    layer.pad = pad;
    return layer;
}

ad::Var Conv2dLayer::operator()(GraphContext& ctx, const ad::Var& x, bool trainable) const {
    return ad::conv2d(x, ctx.use(*weight, trainable), ctx.use(*bias, trainable), stride, pad);
}

} // namespace uvmt::nn
