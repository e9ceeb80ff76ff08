/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/raster_detail.hpp
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

#include <cstdint>
#include <vector>

#include "uvmt/tensor.hpp"

namespace uvmt::detail {

/// Result of z-buffered triangle scanning at one pixel center.
struct TriangleHit {
    std::int32_t tri = -1;
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;   ///< barycentric weights of the winner.
    double depth = 0.0;
};

/// Scans triangles over a grid_h x grid_w pixel grid. `points` is V x 2 in
/// continuous pixel units (pixel (x,y) covers [x,x+1) x [y,y+1), center at
/// (x+0.5, y+0.5)). Larger `depth` wins (closer); ties keep the earlier
/// triangle, so the result is deterministic for a fixed triangle order.
/// Pass depth = nullptr for flat 2D coverage (first triangle wins).
std::vector<TriangleHit> scan_triangles(const Tensor& points, const Tensor* depth,
                                        const std::vector<std::int32_t>& triangles, int grid_h,
                                        int grid_w);

/// Bilinear sample of an H x W x C tensor at continuous texel-center
/// coordinates (px, py), i.e. texel (x,y) sits at (x, y); clamp-to-edge.
void bilinear_sample(const Tensor& t, double px, double py, double* out, int channels);

/// Bilinear footprint at (px, py): the four clamped (y*W + x) texel indices
/// and their weights (weights sum to 1).
void bilinear_weights(int h, int w, double px, double py, std::int32_t idx[4], double wgt[4]);

} // namespace uvmt::detail
