/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/extract.cpp
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

#include "raster_detail.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

namespace {

/// Vertex UV coordinates scaled to continuous texel units for scanning the
/// UV-space triangulation.
Tensor uv_points_in_texels(const FittedFace& fitted, int resolution) {
    const int v_count = fitted.uv_coords.dim(0);
    Tensor pts({v_count, 2});
    for (int i = 0; i < v_count; ++i) {
        pts.at(i, 0) = fitted.uv_coords.at(i, 0) * resolution;
        pts.at(i, 1) = fitted.uv_coords.at(i, 1) * resolution;
    }
    return pts;
}

} // namespace

Tensor render_vertex_colors_uv(const FittedFace& fitted, int resolution) {
    detail::require(resolution > 0, "render_vertex_colors_uv: resolution must be positive");
    detail::require(fitted.vertex_colors.rank() == 2 && fitted.vertex_colors.dim(1) == 3,
                    "render_vertex_colors_uv: vertex_colors must be V x 3");
    const Tensor pts = uv_points_in_texels(fitted, resolution);
    const auto hits = detail::scan_triangles(pts, nullptr, fitted.triangles, resolution, resolution);

    double mean_color[3] = {0.0, 0.0, 0.0};
    const int v_count = fitted.vertex_colors.dim(0);
    for (int i = 0; i < v_count; ++i)
        for (int c = 0; c < 3; ++c) mean_color[c] += fitted.vertex_colors.at(i, c);
    for (double& c : mean_color) c /= v_count;

    Tensor out({resolution, resolution, 3});
    for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x) {
            const auto& hit = hits[static_cast<std::size_t>(y) * static_cast<std::size_t>(resolution) +
                                   static_cast<std::size_t>(x)];
            if (hit.tri < 0) {
                // Sub-texel gutters at the U extremes fall outside every UV
                // triangle; give them the average color.
                for (int c = 0; c < 3; ++c) out.at(y, x, c) = mean_color[c];
                continue;
            }
            const std::size_t t = static_cast<std::size_t>(hit.tri);
            const std::int32_t va = fitted.triangles[3 * t], vb = fitted.triangles[3 * t + 1],
                               vc = fitted.triangles[3 * t + 2];
            for (int c = 0; c < 3; ++c)
                out.at(y, x, c) = hit.b0 * fitted.vertex_colors.at(va, c) +
                                  hit.b1 * fitted.vertex_colors.at(vb, c) +
                                  hit.b2 * fitted.vertex_colors.at(vc, c);
        }
    return out;
}

UVTexture extract_uv_texture(const Tensor& image, const FittedFace& fitted, int uv_resolution,
                             double z_eps_frac) {
    detail::require(image.rank() == 3 && image.dim(2) == 3,
                    "extract_uv_texture: image must be H x W x 3");
    detail::require(uv_resolution > 0, "extract_uv_texture: uv_resolution must be positive");
    const int img_h = image.dim(0), img_w = image.dim(1);

    const Projected proj = project(fitted.vertices, fitted.projection);
    const int v_count = proj.points.dim(0);
    double x_min = proj.points.at(0, 0), x_max = x_min;
    double y_min = proj.points.at(0, 1), y_max = y_min;
    double z_min = proj.depth.at(0), z_max = z_min;
    for (int i = 1; i < v_count; ++i) {
        x_min = std::min(x_min, proj.points.at(i, 0));
        x_max = std::max(x_max, proj.points.at(i, 0));
        y_min = std::min(y_min, proj.points.at(i, 1));
        y_max = std::max(y_max, proj.points.at(i, 1));
        z_min = std::min(z_min, proj.depth.at(i));
        z_max = std::max(z_max, proj.depth.at(i));
    }
    if (x_max <= 0.0 || x_min >= img_w || y_max <= 0.0 || y_min >= img_h)
        throw ExtractionError("extract_uv_texture: face projects entirely outside the image");

    const double z_eps = z_eps_frac * std::max(z_max - z_min, 1e-12);

    // Image-space depth prepass: the winning depth per pixel decides
    // visibility for every texel that lands on that pixel.
    const auto img_hits = detail::scan_triangles(proj.points, &proj.depth, fitted.triangles,
                                                 img_h, img_w);

    // UV-space pass: which triangle owns each texel, and where in it.
    const int res = uv_resolution;
    const Tensor uv_pts = uv_points_in_texels(fitted, res);
    const auto uv_hits = detail::scan_triangles(uv_pts, nullptr, fitted.triangles, res, res);

    const Tensor prior = render_vertex_colors_uv(fitted, res);

    UVTexture out;
    out.pixels = Tensor({res, res, 3});
    out.validity = Tensor({res, res});

    for (int ty = 0; ty < res; ++ty)
        for (int tx = 0; tx < res; ++tx) {
            const auto& hit = uv_hits[static_cast<std::size_t>(ty) * static_cast<std::size_t>(res) +
                                      static_cast<std::size_t>(tx)];
            if (hit.tri < 0) continue;
            const std::size_t t = static_cast<std::size_t>(hit.tri);
            const std::int32_t va = fitted.triangles[3 * t], vb = fitted.triangles[3 * t + 1],
                               vc = fitted.triangles[3 * t + 2];
            const double px = hit.b0 * proj.points.at(va, 0) + hit.b1 * proj.points.at(vb, 0) +
                              hit.b2 * proj.points.at(vc, 0);
            const double py = hit.b0 * proj.points.at(va, 1) + hit.b1 * proj.points.at(vb, 1) +
                              hit.b2 * proj.points.at(vc, 1);
            const double pz = hit.b0 * proj.depth.at(va) + hit.b1 * proj.depth.at(vb) +
                              hit.b2 * proj.depth.at(vc);
            if (px < 0.0 || px >= img_w || py < 0.0 || py >= img_h) continue;

            const int ix = static_cast<int>(px), iy = static_cast<int>(py);
            const auto& front = img_hits[static_cast<std::size_t>(iy) * static_cast<std::size_t>(img_w) +
                                         static_cast<std::size_t>(ix)];
            if (front.tri < 0 || pz < front.depth - z_eps) continue;

            double color[3];
            detail::bilinear_sample(image, px - 0.5, py - 0.5, color, 3);
            for (int c = 0; c < 3; ++c) out.pixels.at(ty, tx, c) = color[c];
            out.validity.at(ty, tx) = 1.0;
        }

    // Fill pass, reading direct visibility only: an invisible texel takes
    // its mirror texel's value when that was directly visible, otherwise
    // the prior (per-vertex colors rendered to UV).
    for (int ty = 0; ty < res; ++ty)
        for (int tx = 0; tx < res; ++tx) {
            if (out.validity.at(ty, tx) == 1.0) continue;
            const int mx = res - 1 - tx;
            if (out.validity.at(ty, mx) == 1.0) {
                for (int c = 0; c < 3; ++c) out.pixels.at(ty, tx, c) = out.pixels.at(ty, mx, c);
            } else {
                for (int c = 0; c < 3; ++c) out.pixels.at(ty, tx, c) = prior.at(ty, tx, c);
            }
        }
    return out;
}

} // namespace uvmt
