/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/uv_unwrap.cpp
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
#include <algorithm>
#include <cmath>
#include <numbers>

#include "uvmt/uv.hpp"

namespace uvmt {

Tensor cylindrical_unwrap(const MorphableBasis& basis) {
    const Tensor& shape = basis.mean_shape;
    detail::require(shape.rank() == 2 && shape.dim(1) == 3,
                    "cylindrical_unwrap: mean shape must be V x 3");
    const int v_count = shape.dim(0);
    detail::require(v_count > 0, "cylindrical_unwrap: empty mesh");

    double y_min = shape.at(0, 1), y_max = shape.at(0, 1);
    for (int i = 1; i < v_count; ++i) {
        y_min = std::min(y_min, shape.at(i, 1));
        y_max = std::max(y_max, shape.at(i, 1));
    }
    if (y_max - y_min < 1e-12)
        throw ContractError("cylindrical_unwrap: degenerate mesh with zero height");

    // theta_span = pi/2: the horizontal angle range [-pi/2, pi/2] fills the
    // whole U axis, so a face-only mesh never wraps around the seam.
    constexpr double theta_span = std::numbers::pi / 2.0;
    Tensor uv({v_count, 2});
    for (int i = 0; i < v_count; ++i) {
        const double u = 0.5 + std::atan2(shape.at(i, 0), shape.at(i, 2)) / (2.0 * theta_span);
        const double v = (shape.at(i, 1) - y_min) / (y_max - y_min);
        uv.at(i, 0) = std::clamp(u, 0.0, 1.0);
        uv.at(i, 1) = std::clamp(v, 0.0, 1.0);
    }
    return uv;
}

} // namespace uvmt
