/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/raster.cpp
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
#include <limits>

#include "raster_detail.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

namespace detail {

std::vector<TriangleHit> scan_triangles(const Tensor& points, const Tensor* depth,
                                        const std::vector<std::int32_t>& triangles, int grid_h,
                                        int grid_w) {
    require(points.rank() == 2 && points.dim(1) == 2, "scan_triangles: points must be V x 2");
    require(grid_h > 0 && grid_w > 0, "scan_triangles: empty grid");
    std::vector<TriangleHit> hits(static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w));

    const std::size_t tri_count = triangles.size() / 3;
    for (std::size_t t = 0; t < tri_count; ++t) {
        const std::int32_t va = triangles[3 * t], vb = triangles[3 * t + 1],
                           vc = triangles[3 * t + 2];
        const double ax = points.at(va, 0), ay = points.at(va, 1);
        const double bx = points.at(vb, 0), by = points.at(vb, 1);
        const double cx = points.at(vc, 0), cy = points.at(vc, 1);
        const double area2 = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        if (area2 == 0.0) continue;

        const double da = depth ? depth->at(va) : 0.0;
        const double db = depth ? depth->at(vb) : 0.0;
        const double dc = depth ? depth->at(vc) : 0.0;

        // Pixel centers live at (x + 0.5, y + 0.5).
        const int x_lo = std::max(0, static_cast<int>(std::ceil(std::min({ax, bx, cx}) - 0.5)));
        const int x_hi = std::min(grid_w - 1, static_cast<int>(std::floor(std::max({ax, bx, cx}) - 0.5)));
        const int y_lo = std::max(0, static_cast<int>(std::ceil(std::min({ay, by, cy}) - 0.5)));
        const int y_hi = std::min(grid_h - 1, static_cast<int>(std::floor(std::max({ay, by, cy}) - 0.5)));

        for (int y = y_lo; y <= y_hi; ++y) {
            const double py = y + 0.5;
            for (int x = x_lo; x <= x_hi; ++x) {
                const double px = x + 0.5;
                const double w0 = ((cx - bx) * (py - by) - (cy - by) * (px - bx)) / area2;
                const double w1 = ((ax - cx) * (py - cy) - (ay - cy) * (px - cx)) / area2;
                const double w2 = 1.0 - w0 - w1;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                const double d = w0 * da + w1 * db + w2 * dc;
                TriangleHit& hit =
                    hits[static_cast<std::size_t>(y) * static_cast<std::size_t>(grid_w) +
                         static_cast<std::size_t>(x)];
                if (hit.tri >= 0 && d <= hit.depth) continue;
                hit.tri = static_cast<std::int32_t>(t);
                hit.b0 = w0;
                hit.b1 = w1;
                hit.b2 = w2;
                hit.depth = d;
            }
        }
    }
    return hits;
}

void bilinear_weights(int h, int w, double px, double py, std::int32_t idx[4], double wgt[4]) {
    const double fx0 = std::floor(px), fy0 = std::floor(py);
    const double tx = px - fx0, ty = py - fy0;
    const int x0 = std::clamp(static_cast<int>(fx0), 0, w - 1);
    const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(fy0), 0, h - 1);
    const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, h - 1);
    idx[0] = static_cast<std::int32_t>(y0 * w + x0);
    idx[1] = static_cast<std::int32_t>(y0 * w + x1);
    idx[2] = static_cast<std::int32_t>(y1 * w + x0);
    idx[3] = static_cast<std::int32_t>(y1 * w + x1);
    wgt[0] = (1.0 - tx) * (1.0 - ty);
    wgt[1] = tx * (1.0 - ty);
    wgt[2] = (1.0 - tx) * ty;
    wgt[3] = tx * ty;
}

void bilinear_sample(const Tensor& t, double px, double py, double* out, int channels) {
    const double fx0 = std::floor(px), fy0 = std::floor(py);
    const double tx = px - fx0, ty = py - fy0;
    const int h = t.dim(0), w = t.dim(1);
    const int x0 = std::clamp(static_cast<int>(fx0), 0, w - 1);
    const int x1 = std::clamp(static_cast<int>(fx0) + 1, 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(fy0), 0, h - 1);
    const int y1 = std::clamp(static_cast<int>(fy0) + 1, 0, h - 1);
    // Nested lerps rather than a weighted four-tap sum: a constant image
    // then samples to exactly that constant.
    for (int c = 0; c < channels; ++c) {
        const double top = t.at(y0, x0, c) + tx * (t.at(y0, x1, c) - t.at(y0, x0, c));
        const double bottom = t.at(y1, x0, c) + tx * (t.at(y1, x1, c) - t.at(y1, x0, c));
        out[c] = top + ty * (bottom - top);
    }
}

} // namespace detail

namespace {

void check_fitted(const FittedFace& fitted) {
    detail::require(fitted.vertices.rank() == 2 && fitted.vertices.dim(1) == 3,
                    "rasterize: vertices must be V x 3");
    const int v_count = fitted.vertices.dim(0);
    detail::require(fitted.uv_coords.rank() == 2 && fitted.uv_coords.dim(0) == v_count &&
                        fitted.uv_coords.dim(1) == 2,
                    "rasterize: uv_coords must be V x 2");
    detail::require(!fitted.triangles.empty() && fitted.triangles.size() % 3 == 0,
                    "rasterize: triangle list empty or not divisible by 3");
    detail::require(fitted.projection.rank() == 2 && fitted.projection.dim(0) == 3 &&
                        fitted.projection.dim(1) == 4,
                    "rasterize: projection must be 3 x 4");
}

} // namespace

RasterMap build_raster_map(const FittedFace& fitted, int image_h, int image_w, int uv_resolution) {
    check_fitted(fitted);
    detail::require(image_h > 0 && image_w > 0, "rasterize: image size must be positive");
    detail::require(uv_resolution > 0, "rasterize: uv_resolution must be positive");

    const Projected proj = project(fitted.vertices, fitted.projection);
    const auto hits = detail::scan_triangles(proj.points, &proj.depth, fitted.triangles, image_h,
                                             image_w);

    RasterMap map;
    map.image_h = image_h;
    map.image_w = image_w;
    map.uv_resolution = uv_resolution;
    const std::size_t n = hits.size();
    map.triangle.assign(n, -1);
    map.texel.assign(n, {0, 0, 0, 0});
    map.weight.assign(n, {0.0, 0.0, 0.0, 0.0});
    map.depth.assign(n, 0.0);

    const int res = uv_resolution;
    for (std::size_t p = 0; p < n; ++p) {
        const detail::TriangleHit& hit = hits[p];
        if (hit.tri < 0) continue;
        const std::size_t t = static_cast<std::size_t>(hit.tri);
        const std::int32_t va = fitted.triangles[3 * t], vb = fitted.triangles[3 * t + 1],
                           vc = fitted.triangles[3 * t + 2];
        const double u = hit.b0 * fitted.uv_coords.at(va, 0) + hit.b1 * fitted.uv_coords.at(vb, 0) +
                         hit.b2 * fitted.uv_coords.at(vc, 0);
        const double v = hit.b0 * fitted.uv_coords.at(va, 1) + hit.b1 * fitted.uv_coords.at(vb, 1) +
                         hit.b2 * fitted.uv_coords.at(vc, 1);
        std::int32_t idx[4];
        double wgt[4];
        // Texel (x,y) center sits at uv ((x+0.5)/res, (y+0.5)/res).
        detail::bilinear_weights(res, res, u * res - 0.5, v * res - 0.5, idx, wgt);
        map.triangle[p] = hit.tri;
        for (int k = 0; k < 4; ++k) {
            map.texel[p][static_cast<std::size_t>(k)] = idx[k];
            map.weight[p][static_cast<std::size_t>(k)] = wgt[k];
        }
        map.depth[p] = hit.depth;
    }
    return map;
}

Tensor apply_raster_map(const RasterMap& map, const Tensor& uv_pixels, double background) {
    detail::require(uv_pixels.rank() == 3 && uv_pixels.dim(0) == map.uv_resolution &&
                        uv_pixels.dim(1) == map.uv_resolution,
                    "apply_raster_map: texture must be R x R x C with R = uv_resolution");
    const int channels = uv_pixels.dim(2);
    const int res = map.uv_resolution;
    Tensor out({map.image_h, map.image_w, channels});
    for (int y = 0; y < map.image_h; ++y)
        for (int x = 0; x < map.image_w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(map.image_w) +
                                  static_cast<std::size_t>(x);
            if (map.triangle[p] < 0) {
                for (int c = 0; c < channels; ++c) out.at(y, x, c) = background;
                continue;
            }
            for (int c = 0; c < channels; ++c) {
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const std::int32_t t = map.texel[p][static_cast<std::size_t>(k)];
                    acc += map.weight[p][static_cast<std::size_t>(k)] *
                           uv_pixels.at(t / res, t % res, c);
                }
                out.at(y, x, c) = acc;
            }
        }
    return out;
}

Tensor raster_map_backward(const RasterMap& map, const Tensor& grad_pixels) {
    detail::require(grad_pixels.rank() == 3 && grad_pixels.dim(0) == map.image_h &&
                        grad_pixels.dim(1) == map.image_w,
                    "raster_map_backward: gradient must be H x W x C");
    const int channels = grad_pixels.dim(2);
    const int res = map.uv_resolution;
    Tensor grad_uv({res, res, channels});
    for (int y = 0; y < map.image_h; ++y)
        for (int x = 0; x < map.image_w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * static_cast<std::size_t>(map.image_w) +
                                  static_cast<std::size_t>(x);
            if (map.triangle[p] < 0) continue;
            for (int k = 0; k < 4; ++k) {
                const std::int32_t t = map.texel[p][static_cast<std::size_t>(k)];
                const double w = map.weight[p][static_cast<std::size_t>(k)];
                for (int c = 0; c < channels; ++c)
                    grad_uv.at(t / res, t % res, c) += w * grad_pixels.at(y, x, c);
            }
        }
    return grad_uv;
}

RenderedImage rasterize(const FittedFace& fitted, const UVTexture& texture, int image_h,
                        int image_w, double background) {
    detail::require(texture.pixels.rank() == 3 && texture.pixels.dim(2) == 3,
                    "rasterize: texture pixels must be R x R x 3");
    const RasterMap map = build_raster_map(fitted, image_h, image_w, texture.resolution());
    RenderedImage out;
    out.pixels = apply_raster_map(map, texture.pixels, background);
    out.face_mask = Tensor({image_h, image_w});
    for (int y = 0; y < image_h; ++y)
        for (int x = 0; x < image_w; ++x) out.face_mask.at(y, x) = map.covered(y, x) ? 1.0 : 0.0;
    return out;
}

std::map<std::string, Tensor> rasterize_region_masks(const FittedFace& fitted,
                                                     const std::map<std::string, Tensor>& uv_masks,
                                                     int image_h, int image_w) {
    detail::require(!uv_masks.empty(), "rasterize_region_masks: no masks given");
    const int res = uv_masks.begin()->second.dim(0);
    for (const auto& [name, mask] : uv_masks)
        detail::require(mask.rank() == 2 && mask.dim(0) == res && mask.dim(1) == res,
                        "rasterize_region_masks: mask '" + name + "' must be R x R");

    const RasterMap map = build_raster_map(fitted, image_h, image_w, res);
    std::map<std::string, Tensor> out;
    for (const auto& [name, mask] : uv_masks) {
        Tensor channel = mask.reshaped({res, res, 1});
        const Tensor sampled = apply_raster_map(map, channel, 0.0);
        Tensor binary({image_h, image_w});
        for (int y = 0; y < image_h; ++y)
            for (int x = 0; x < image_w; ++x)
                binary.at(y, x) = sampled.at(y, x, 0) > 0.5 ? 1.0 : 0.0;
        out.emplace(name, std::move(binary));
    }
    return out;
}

Tensor flip_width(const Tensor& t, int axis) {
    detail::require(axis >= 0 && axis < t.rank(), "flip_width: axis out of range");
    const int extent = t.dim(axis);
    detail::require(extent % 2 == 0, "flip_width: axis extent must be even, got " +
                                         std::to_string(extent));
    Tensor out(t.shape());
    // Walk the tensor as outer x extent x inner.
    std::int64_t inner = 1, outer = 1;
    for (int d = axis + 1; d < t.rank(); ++d) inner *= t.dim(d);
    for (int d = 0; d < axis; ++d) outer *= t.dim(d);
    for (std::int64_t o = 0; o < outer; ++o)
        for (int e = 0; e < extent; ++e) {
            const std::int64_t src = (o * extent + e) * inner;
            const std::int64_t dst = (o * extent + (extent - 1 - e)) * inner;
            for (std::int64_t i = 0; i < inner; ++i) out[dst + i] = t[src + i];
        }
    return out;
}

UVTexture flip_uv(const UVTexture& texture) {
    UVTexture out;
    out.pixels = flip_width(texture.pixels, 1);
    out.validity = flip_width(texture.validity, 1);
    return out;
}

} // namespace uvmt
