/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/morphable.hpp
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
#include <string>
#include <vector>

#include "uvmt/tensor.hpp"

namespace uvmt {

/// Linear face model: shape is mean plus identity and expression basis
/// combinations, texture is mean plus texture basis combinations. Immutable
/// after construction; safe to share across threads.
struct MorphableBasis {
    Tensor mean_shape;   ///< V x 3, model units.
    Tensor id_basis;     ///< V x 3 x K_id.
    Tensor exp_basis;    ///< V x 3 x K_exp.
    Tensor mean_texture; ///< V x 3, values in [0,1].
    Tensor tex_basis;    ///< V x 3 x K_tex.
    std::vector<std::int32_t> triangles;  ///< F x 3 vertex indices, row-major.
    std::vector<std::int32_t> mirror_map; ///< V-length involution pairing bilateral mirrors.
    Tensor uv_coords;    ///< V x 2 in [0,1]^2, filled by cylindrical_unwrap.

    int vertex_count() const { return mean_shape.dim(0); }
    int triangle_count() const { return static_cast<int>(triangles.size() / 3); }
    int k_id() const { return id_basis.dim(2); }
    int k_exp() const { return exp_basis.dim(2); }
    int k_tex() const { return tex_basis.dim(2); }
};

/// Checks the structural invariants (mirror involution, mean-shape symmetry
/// within 1e-6, triangle index validity, single connected component).
/// Throws ContractError on the first violation.
void validate_basis(const MorphableBasis& basis);

struct FaceCoefficients {
    std::vector<double> alpha_id;
    std::vector<double> alpha_exp;
    std::vector<double> alpha_tex;
    Tensor projection; ///< 3 x 4 weak-perspective camera matrix.

    FaceCoefficients() : projection({3, 4}) {}
};

/// Default magnitude bound for sampled coefficients, in standard-deviation
/// units of the basis columns.
constexpr double kDefaultCoeffClamp = 4.0;

/// True when the 3x3 left block has two orthonormal rows scaled by a common
/// positive factor, within tolerance.
bool is_weak_perspective(const Tensor& projection, double tol = 1e-5);

/// Builds a weak-perspective camera: rotation (degrees, applied yaw then
/// pitch then roll), uniform scale, 2D translation. When y_down is set the
/// vertical image axis grows downward, matching raster image convention.
Tensor make_weak_perspective(double scale, double yaw_deg, double pitch_deg, double roll_deg,
                             double tx, double ty, bool y_down = false);

/// S = mean_shape + id_basis * alpha_id + exp_basis * alpha_exp.
Tensor evaluate_shape(const MorphableBasis& basis, const FaceCoefficients& coeffs);

/// T = mean_texture + tex_basis * alpha_tex. Never clamped here; values are
/// clamped to [0,1] only when exported to images.
Tensor evaluate_texture(const MorphableBasis& basis, const FaceCoefficients& coeffs);

struct FitResult {
    FaceCoefficients coefficients;
    double residual = 0.0; ///< L2 norm of the landmark residual.
};

/// Ridge-regularized linear least squares for alpha_id and alpha_exp against
/// the landmark rows of the bases. landmarks_3d is L x 3 in model units.
/// regularizer = 0 requires a full-rank system, otherwise SingularSystemError.
FitResult fit_coefficients(const Tensor& landmarks_3d, const std::vector<int>& landmark_indices,
                           const MorphableBasis& basis, double regularizer);

struct Projected {
    Tensor points; ///< V x 2 image coordinates.
    Tensor depth;  ///< V, used for visibility.
};

/// Homogeneous multiply then drop depth; depth returned separately.
Projected project(const Tensor& vertices, const Tensor& projection);

/// Posed mesh with per-vertex colors ready for rasterization and extraction.
struct FittedFace {
    Tensor vertices;      ///< V x 3 posed shape.
    Tensor vertex_colors; ///< V x 3 texture values.
    std::vector<std::int32_t> triangles;
    Tensor projection; ///< 3 x 4.
    Tensor uv_coords;  ///< V x 2.
};

FittedFace make_fitted_face(const MorphableBasis& basis, const FaceCoefficients& coeffs);

struct SyntheticBasisOptions {
    int rows = 31;         ///< vertical grid resolution (odd keeps a midline row harmless).
    int cols = 33;         ///< azimuthal resolution; odd so an exact midline column exists.
    int k_id = 8;
    int k_exp = 8;
    int k_tex = 8;
    std::uint64_t seed = 20260101;
    double radius = 1.0;
    double y_min = -1.1;
    double y_max = 1.1;
    double vertical_semi_axis = 1.4;
    double nose_height = 0.18;
    double sigma_shape = 0.02; ///< RMS displacement of one basis column (1 sigma).
    double sigma_tex = 0.04;
};

/// Procedural ellipsoid-like head with smooth random basis columns. Identity
/// and expression columns are bilaterally symmetric except the last two of
/// each, which are antisymmetric; texture columns are all symmetric.
/// Deterministic in the seed. uv_coords are filled by cylindrical unwrap.
MorphableBasis make_synthetic_basis(const SyntheticBasisOptions& options = {});

/// Landmark indices spread uniformly over the mesh.
std::vector<int> default_landmarks(const MorphableBasis& basis, int count = 64);

/// Subdirectory-free basis container I/O ("UVT1" records: mean_shape,
/// id_basis, exp_basis, mean_texture, tex_basis, triangles, mirror_map,
/// uv_coords).
void save_basis(const std::string& path, const MorphableBasis& basis);
MorphableBasis load_basis(const std::string& path);

/// Plain-text coefficient file: one coefficient vector per line
/// ("alpha_id = v0 v1 ...", "projection = 12 row-major values"),
/// locale-independent decimal formatting.
void save_coefficients(const std::string& path, const FaceCoefficients& coeffs);
FaceCoefficients load_coefficients(const std::string& path);

} // namespace uvmt
