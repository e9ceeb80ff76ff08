/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/uv.hpp
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

/// Cylindrical UV unwrap, visibility-aware texture extraction, and a
/// z-buffered rasterizer whose output is an exact sparse linear function of
/// the texture texels (so texture gradients are exact by construction).

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uvmt/morphable.hpp"
#include "uvmt/tensor.hpp"

namespace uvmt {

/// A face texture in UV space. `pixels` is resolution x resolution x 3 in
/// [0,1]; `validity` marks texels that were directly visible at extraction
/// time (invisible texels are filled, never left undefined).
struct UVTexture {
    Tensor pixels;
    Tensor validity;

    int resolution() const { return pixels.rank() == 3 ? pixels.dim(0) : 0; }
};

/// A rendered image plus its coverage mask and any named region masks
/// (lips, eye, face) rendered alongside it.
struct RenderedImage {
    Tensor pixels;                            ///< H x W x 3 in [0,1].
    Tensor face_mask;                         ///< H x W in {0,1}.
    std::map<std::string, Tensor> region_masks;
};

/// The fixed sparse linear map from UV texels to image pixels for one
/// (geometry, projection, image size) triple. Each covered pixel blends at
/// most four texels with bilinear weights; background pixels have tri = -1.
struct RasterMap {
    int image_h = 0;
    int image_w = 0;
    int uv_resolution = 0;
    std::vector<std::int32_t> triangle;                 ///< per pixel; -1 = background.
    std::vector<std::array<std::int32_t, 4>> texel;     ///< texel indices (y * W + x).
    std::vector<std::array<double, 4>> weight;          ///< bilinear weights, sum to 1.
    std::vector<double> depth;                          ///< winning z per covered pixel.

    bool covered(int y, int x) const {
        return triangle[static_cast<std::size_t>(y) * static_cast<std::size_t>(image_w) +
                        static_cast<std::size_t>(x)] >= 0;
    }
};

/// Computes per-vertex UV coordinates on the mean shape:
/// u = 0.5 + atan2(x, z) / (2 * theta_span) with theta_span = pi/2, and
/// v = (y - y_min) / (y_max - y_min), both clipped to [0,1]. Mirror pairs
/// land on (1 - u, v). Throws ContractError on a zero-height mesh.
Tensor cylindrical_unwrap(const MorphableBasis& basis);

/// Builds the pixel -> texel sampling map for rendering `fitted` into an
/// image_h x image_w frame with textures at `uv_resolution`.
RasterMap build_raster_map(const FittedFace& fitted, int image_h, int image_w, int uv_resolution);

/// Applies the sparse linear map: uv_pixels is R x R x 3, the result is
/// H x W x 3 with uncovered pixels set to `background`.
Tensor apply_raster_map(const RasterMap& map, const Tensor& uv_pixels, double background = 0.0);

/// Transpose of apply_raster_map: scatters an H x W x 3 image-space gradient
/// back to an R x R x 3 texel-space gradient.
Tensor raster_map_backward(const RasterMap& map, const Tensor& grad_pixels);

/// Renders the fitted face with the given UV texture. Pixel colors are
/// bilinear texture samples at barycentrically interpolated UV coordinates,
/// so the image is linear in the texture.
RenderedImage rasterize(const FittedFace& fitted, const UVTexture& texture, int image_h,
                        int image_w, double background = 0.0);

/// Renders UV-space binary masks into image space with the same sampling as
/// rasterize(), then thresholds at 0.5 (strict), which keeps disjoint UV
/// masks disjoint in image space.
std::map<std::string, Tensor> rasterize_region_masks(const FittedFace& fitted,
                                                     const std::map<std::string, Tensor>& uv_masks,
                                                     int image_h, int image_w);

/// Extracts the UV texture of `image` under the fitted geometry. Visibility
/// uses a depth-buffer test at the sampled image position with tolerance
/// z_eps_frac of the projected bounding-box depth range; invisible texels
/// take their mirror texel's value when that is visible, else the mean
/// texture rendered to UV. Throws ExtractionError if the face projects
/// entirely outside the image.
UVTexture extract_uv_texture(const Tensor& image, const FittedFace& fitted, int uv_resolution,
                             double z_eps_frac = 1e-3);

/// Interpolates per-vertex colors over the UV-space triangulation, giving a
/// resolution x resolution x 3 texture (used for mean-texture fill).
Tensor render_vertex_colors_uv(const FittedFace& fitted, int resolution);

/// Reverses the given axis of a tensor. The axis extent must be even so the
/// flip is an exact involution with no fixed column; odd extents are a
/// contract error.
Tensor flip_width(const Tensor& t, int axis);

/// Flips a UV texture (and its validity mask) across the facial midline.
UVTexture flip_uv(const UVTexture& texture);

/// The built-in UV region masks ("lips", "eye", "face"), authored against
/// the canonical cylindrical layout at the requested resolution. The face
/// mask excludes the lips and eye regions.
std::map<std::string, Tensor> builtin_region_masks_uv(int resolution);

} // namespace uvmt
