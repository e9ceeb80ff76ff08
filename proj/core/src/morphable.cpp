/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/morphable.cpp
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
#include "uvmt/morphable.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "uvmt/container.hpp"
#include "uvmt/rng.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

namespace {

int find_root(std::vector<int>& parent, int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
        parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        v = parent[static_cast<std::size_t>(v)];
    }
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& tok, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw IoError("coefficients: bad number '" + tok + "' in " + context);
    return v;
}

/// Smooth random scalar field over the (column, row) parameter square:
/// a short sum of low-frequency cosines.
struct SmoothField {
    struct Term {
        double amp, fu, fv, phase;
    };
    std::vector<Term> terms;

    static SmoothField sample(std::mt19937_64& rng) {
        std::normal_distribution<double> amp(0.0, 1.0);
        std::uniform_int_distribution<int> freq(0, 2);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        SmoothField f;
        for (int m = 1; m <= 6; ++m) {
            Term t;
            t.amp = amp(rng) / m;
            t.fu = freq(rng);
            t.fv = freq(rng);
            t.phase = phase(rng);
            f.terms.push_back(t);
        }
        return f;
    }

    double operator()(double pu, double pv) const {
        double g = 0.0;
        for (const Term& t : terms)
            g += t.amp * std::cos(2.0 * std::numbers::pi * (t.fu * pu + t.fv * pv) + t.phase);
        return g;
    }
};

enum class Parity { Symmetric, Antisymmetric };

/// Symmetrizes a V x 3 displacement field under the mirror map. Geometric
/// fields negate x across the midline; color fields do not.
void apply_parity(Tensor& field, const std::vector<std::int32_t>& mirror_map, Parity parity,
                  bool negate_x) {
    const int v_count = field.dim(0);
    Tensor out = field;
    for (int i = 0; i < v_count; ++i) {
        const int m = mirror_map[static_cast<std::size_t>(i)];
        for (int c = 0; c < 3; ++c) {
            double mirrored = field.at(m, c);
            if (negate_x && c == 0) mirrored = -mirrored;
            const double s = parity == Parity::Symmetric ? 1.0 : -1.0;
            out.at(i, c) = 0.5 * (field.at(i, c) + s * mirrored);
        }
    }
    field = out;
}

void normalize_rms(Tensor& field, double target_rms) {
    double ss = 0.0;
    for (std::int64_t i = 0; i < field.size(); ++i) ss += field[i] * field[i];
    const double rms = std::sqrt(ss / static_cast<double>(field.size()));
    if (rms < 1e-12) return;
    field *= target_rms / rms;
}

} // namespace

void validate_basis(const MorphableBasis& basis) {
    const int v_count = basis.vertex_count();
    detail::require(static_cast<int>(basis.mirror_map.size()) == v_count,
                    "basis: mirror_map length != vertex count (axis V)");
    for (int i = 0; i < v_count; ++i) {
        const int m = basis.mirror_map[static_cast<std::size_t>(i)];
        detail::require(m >= 0 && m < v_count, "basis: mirror_map index out of range");
        detail::require(basis.mirror_map[static_cast<std::size_t>(m)] == i,
                        "basis: mirror_map is not an involution at vertex " + std::to_string(i));
    }
    for (int i = 0; i < v_count; ++i) {
        const int m = basis.mirror_map[static_cast<std::size_t>(i)];
        const double dx = std::abs(basis.mean_shape.at(i, 0) + basis.mean_shape.at(m, 0));
        const double dy = std::abs(basis.mean_shape.at(i, 1) - basis.mean_shape.at(m, 1));
        const double dz = std::abs(basis.mean_shape.at(i, 2) - basis.mean_shape.at(m, 2));
        detail::require(dx <= 1e-6 && dy <= 1e-6 && dz <= 1e-6,
                        "basis: mean shape breaks bilateral symmetry at vertex " + std::to_string(i));
    }
    detail::require(basis.triangles.size() % 3 == 0, "basis: triangle list length not divisible by 3");
    std::vector<int> parent(static_cast<std::size_t>(v_count));
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t t = 0; t < basis.triangles.size(); t += 3) {
        for (int c = 0; c < 3; ++c) {
            const int vi = basis.triangles[t + static_cast<std::size_t>(c)];
            detail::require(vi >= 0 && vi < v_count,
                            "basis: triangle references invalid vertex " + std::to_string(vi));
        }
        const int a = find_root(parent, basis.triangles[t]);
        const int b = find_root(parent, basis.triangles[t + 1]);
        const int c = find_root(parent, basis.triangles[t + 2]);
        parent[static_cast<std::size_t>(b)] = a;
        parent[static_cast<std::size_t>(find_root(parent, c))] = find_root(parent, a);
    }
    const int root = find_root(parent, 0);
    for (int i = 0; i < v_count; ++i)
        detail::require(find_root(parent, i) == root, "basis: mesh is not a single connected component");
}

bool is_weak_perspective(const Tensor& projection, double tol) {
    if (projection.rank() != 2 || projection.dim(0) != 3 || projection.dim(1) != 4) return false;
    const double r0[3] = {projection.at(0, 0), projection.at(0, 1), projection.at(0, 2)};
    const double r1[3] = {projection.at(1, 0), projection.at(1, 1), projection.at(1, 2)};
    const double n0 = std::sqrt(r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2]);
    const double n1 = std::sqrt(r1[0] * r1[0] + r1[1] * r1[1] + r1[2] * r1[2]);
    if (n0 <= 0.0 || n1 <= 0.0) return false;
    const double dot = r0[0] * r1[0] + r0[1] * r1[1] + r0[2] * r1[2];
    return std::abs(n0 - n1) <= tol * std::max(n0, n1) && std::abs(dot) <= tol * n0 * n1;
}

Tensor make_weak_perspective(double scale, double yaw_deg, double pitch_deg, double roll_deg,
                             double tx, double ty, bool y_down) {
    const double d2r = std::numbers::pi / 180.0;
    const double cy = std::cos(yaw_deg * d2r), sy = std::sin(yaw_deg * d2r);
    const double cp = std::cos(pitch_deg * d2r), sp = std::sin(pitch_deg * d2r);
    const double cr = std::cos(roll_deg * d2r), sr = std::sin(roll_deg * d2r);

    // R = Ry(yaw) * Rx(pitch) * Rz(roll)
    Eigen::Matrix3d ry, rx, rz;
    ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
    rx << 1, 0, 0, 0, cp, -sp, 0, sp, cp;
    rz << cr, -sr, 0, sr, cr, 0, 0, 0, 1;
    const Eigen::Matrix3d r = ry * rx * rz;

    Tensor p({3, 4});
    for (int c = 0; c < 3; ++c) {
        p.at(0, c) = scale * r(0, c);
        p.at(1, c) = (y_down ? -scale : scale) * r(1, c);
        p.at(2, c) = scale * r(2, c);
    }
    p.at(0, 3) = tx;
    p.at(1, 3) = ty;
    p.at(2, 3) = 0.0;
    return p;
}

namespace {

Tensor evaluate_linear(const Tensor& mean, const Tensor& basis, const std::vector<double>& alpha,
                       const std::string& op, const std::string& axis) {
    const int k = basis.dim(2);
    if (static_cast<int>(alpha.size()) != k)
        throw ContractError(op + ": coefficient vector has length " + std::to_string(alpha.size()) +
                            " but basis expects " + std::to_string(k) + " (axis " + axis + ")");
    Tensor out = mean;
    const int v_count = mean.dim(0);
    for (int i = 0; i < v_count; ++i)
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += basis.at(i, c, j) * alpha[static_cast<std::size_t>(j)];
            out.at(i, c) += acc;
        }
    return out;
}

} // namespace

Tensor evaluate_shape(const MorphableBasis& basis, const FaceCoefficients& coeffs) {
    Tensor s = evaluate_linear(basis.mean_shape, basis.id_basis, coeffs.alpha_id, "evaluate_shape",
                               "K_id");
    return evaluate_linear(s, basis.exp_basis, coeffs.alpha_exp, "evaluate_shape", "K_exp");
}

Tensor evaluate_texture(const MorphableBasis& basis, const FaceCoefficients& coeffs) {
    return evaluate_linear(basis.mean_texture, basis.tex_basis, coeffs.alpha_tex,
                           "evaluate_texture", "K_tex");
}

FitResult fit_coefficients(const Tensor& landmarks_3d, const std::vector<int>& landmark_indices,
                           const MorphableBasis& basis, double regularizer) {
    detail::require(landmarks_3d.rank() == 2 && landmarks_3d.dim(1) == 3,
                    "fit_coefficients: landmarks_3d must be L x 3");
    const int l_count = landmarks_3d.dim(0);
    detail::require(static_cast<int>(landmark_indices.size()) == l_count,
                    "fit_coefficients: landmark_indices length != landmark count (axis L)");
    const int k_id = basis.k_id(), k_exp = basis.k_exp();
    const int k = k_id + k_exp;
    detail::require(l_count >= k, "fit_coefficients: need at least K_id + K_exp landmarks (axis L)");
    detail::require(regularizer >= 0.0, "fit_coefficients: regularizer must be nonnegative");

    Eigen::MatrixXd a(3 * l_count, k);
    Eigen::VectorXd b(3 * l_count);
    for (int l = 0; l < l_count; ++l) {
        const int vi = landmark_indices[static_cast<std::size_t>(l)];
        detail::require(vi >= 0 && vi < basis.vertex_count(),
                        "fit_coefficients: landmark index out of range");
        for (int c = 0; c < 3; ++c) {
            const int row = 3 * l + c;
            for (int j = 0; j < k_id; ++j) a(row, j) = basis.id_basis.at(vi, c, j);
            for (int j = 0; j < k_exp; ++j) a(row, k_id + j) = basis.exp_basis.at(vi, c, j);
            b(row) = landmarks_3d.at(l, c) - basis.mean_shape.at(vi, c);
        }
    }

    Eigen::VectorXd x;
    if (regularizer == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < k)
            throw SingularSystemError(
                "fit_coefficients: rank-deficient system (rank " + std::to_string(qr.rank()) +
                " < " + std::to_string(k) + ") with zero regularizer");
        x = qr.solve(b);
    } else {
        const Eigen::MatrixXd normal =
            a.transpose() * a + regularizer * Eigen::MatrixXd::Identity(k, k);
        x = normal.ldlt().solve(a.transpose() * b);
    }

    FitResult result;
    result.coefficients.alpha_id.assign(x.data(), x.data() + k_id);
    result.coefficients.alpha_exp.assign(x.data() + k_id, x.data() + k);
    result.coefficients.alpha_tex.assign(static_cast<std::size_t>(basis.k_tex()), 0.0);
    result.coefficients.projection = make_weak_perspective(1.0, 0, 0, 0, 0, 0);
    result.residual = (a * x - b).norm();
    return result;
}

Projected project(const Tensor& vertices, const Tensor& projection) {
    detail::require(vertices.rank() == 2 && vertices.dim(1) == 3, "project: vertices must be V x 3");
    detail::require(projection.rank() == 2 && projection.dim(0) == 3 && projection.dim(1) == 4,
                    "project: projection must be 3 x 4");
    const int v_count = vertices.dim(0);
    Projected out{Tensor({v_count, 2}), Tensor({v_count})};
    for (int i = 0; i < v_count; ++i) {
        const double x = vertices.at(i, 0), y = vertices.at(i, 1), z = vertices.at(i, 2);
        for (int r = 0; r < 2; ++r)
            out.points.at(i, r) = projection.at(r, 0) * x + projection.at(r, 1) * y +
                                  projection.at(r, 2) * z + projection.at(r, 3);
        out.depth.at(i) = projection.at(2, 0) * x + projection.at(2, 1) * y +
                          projection.at(2, 2) * z + projection.at(2, 3);
    }
    return out;
}

FittedFace make_fitted_face(const MorphableBasis& basis, const FaceCoefficients& coeffs) {
    FittedFace face;
    face.vertices = evaluate_shape(basis, coeffs);
    face.vertex_colors = evaluate_texture(basis, coeffs);
    face.triangles = basis.triangles;
    face.projection = coeffs.projection;
    face.uv_coords = basis.uv_coords;
    return face;
}

MorphableBasis make_synthetic_basis(const SyntheticBasisOptions& options) {
    const int nv = options.rows, nu = options.cols;
    detail::require(nv >= 4 && nu >= 5 && nu % 2 == 1,
                    "synthetic basis: need rows >= 4 and odd cols >= 5");
    const int mid = (nu - 1) / 2;
    const int v_count = nv * nu;

    MorphableBasis basis;
    basis.mean_shape = Tensor({v_count, 3});
    basis.mean_texture = Tensor({v_count, 3});
    basis.mirror_map.resize(static_cast<std::size_t>(v_count));

    const double theta_span = std::numbers::pi / 2.0;
    auto index = [nu](int i, int j) { return i * nu + j; };

    // Build the left half plus midline, mirror the right half so bilateral
    // symmetry is exact in floating point.
    for (int i = 0; i < nv; ++i) {
        const double y = options.y_min + (options.y_max - options.y_min) * i / (nv - 1);
        const double vn = static_cast<double>(i) / (nv - 1);
        const double rr = options.radius *
                          std::sqrt(std::max(0.05, 1.0 - (y / options.vertical_semi_axis) *
                                                             (y / options.vertical_semi_axis)));
        for (int j = 0; j <= mid; ++j) {
            const double theta = theta_span * (2.0 * j / (nu - 1) - 1.0);
            const double tn = theta / theta_span;
            const double bump =
                options.nose_height *
                std::exp(-(tn / 0.29) * (tn / 0.29) -
                         ((vn - 0.45) / 0.16) * ((vn - 0.45) / 0.16));
            const int vi = index(i, j);
            basis.mean_shape.at(vi, 0) = rr * std::sin(theta);
            basis.mean_shape.at(vi, 1) = y;
            basis.mean_shape.at(vi, 2) = rr * std::cos(theta) + bump;

            const double shade = (0.90 + 0.12 * vn) * (0.92 + 0.08 * std::cos(theta));
            basis.mean_texture.at(vi, 0) = 0.72 * shade;
            basis.mean_texture.at(vi, 1) = 0.57 * shade;
            basis.mean_texture.at(vi, 2) = 0.47 * shade;
        }
        for (int j = mid + 1; j < nu; ++j) {
            const int vi = index(i, j), vm = index(i, nu - 1 - j);
            basis.mean_shape.at(vi, 0) = -basis.mean_shape.at(vm, 0);
            basis.mean_shape.at(vi, 1) = basis.mean_shape.at(vm, 1);
            basis.mean_shape.at(vi, 2) = basis.mean_shape.at(vm, 2);
            for (int c = 0; c < 3; ++c) basis.mean_texture.at(vi, c) = basis.mean_texture.at(vm, c);
        }
        for (int j = 0; j < nu; ++j)
            basis.mirror_map[static_cast<std::size_t>(index(i, j))] =
                static_cast<std::int32_t>(index(i, nu - 1 - j));
    }

    // Quads split along mirrored diagonals so the triangulation itself is
    // bilaterally symmetric.
    for (int i = 0; i + 1 < nv; ++i) {
        for (int j = 0; j + 1 < nu; ++j) {
            const std::int32_t v00 = static_cast<std::int32_t>(index(i, j));
            const std::int32_t v01 = static_cast<std::int32_t>(index(i, j + 1));
            const std::int32_t v10 = static_cast<std::int32_t>(index(i + 1, j));
            const std::int32_t v11 = static_cast<std::int32_t>(index(i + 1, j + 1));
            if (j < mid) {
                basis.triangles.insert(basis.triangles.end(), {v00, v01, v11});
                basis.triangles.insert(basis.triangles.end(), {v00, v11, v10});
            } else {
                basis.triangles.insert(basis.triangles.end(), {v00, v01, v10});
                basis.triangles.insert(basis.triangles.end(), {v01, v11, v10});
            }
        }
    }

    auto rng = make_rng(options.seed, 0x6d6f7270ULL);
    auto sample_column = [&](Parity parity, bool negate_x, double sigma) {
        Tensor field({v_count, 3});
        SmoothField fx = SmoothField::sample(rng);
        SmoothField fy = SmoothField::sample(rng);
        SmoothField fz = SmoothField::sample(rng);
        for (int i = 0; i < nv; ++i)
            for (int j = 0; j < nu; ++j) {
                const double pu = static_cast<double>(j) / (nu - 1);
                const double pv = static_cast<double>(i) / (nv - 1);
                const int vi = index(i, j);
                field.at(vi, 0) = fx(pu, pv);
                field.at(vi, 1) = fy(pu, pv);
                field.at(vi, 2) = fz(pu, pv);
            }
        apply_parity(field, basis.mirror_map, parity, negate_x);
        normalize_rms(field, sigma);
        return field;
    };

    auto fill_basis = [&](int k, bool geometric, double sigma, int antisymmetric_tail) {
        Tensor out({v_count, 3, k});
        for (int col = 0; col < k; ++col) {
            const Parity parity =
                col >= k - antisymmetric_tail ? Parity::Antisymmetric : Parity::Symmetric;
            Tensor field = sample_column(parity, geometric, sigma);
            for (int i = 0; i < v_count; ++i)
                for (int c = 0; c < 3; ++c) out.at(i, c, col) = field.at(i, c);
        }
        return out;
    };

    basis.id_basis = fill_basis(options.k_id, true, options.sigma_shape, 2);
    basis.exp_basis = fill_basis(options.k_exp, true, options.sigma_shape, 2);
    basis.tex_basis = fill_basis(options.k_tex, false, options.sigma_tex, 0);

    basis.uv_coords = cylindrical_unwrap(basis);

    // Snap every tensor to float32 so a generated basis is bit-identical to
    // one that went through the container format.  Mirroring is a pure sign
    // flip, so the snap keeps the bilateral symmetry exact.
    basis.mean_shape.snap_to_float32();
    basis.id_basis.snap_to_float32();
    basis.exp_basis.snap_to_float32();
    basis.mean_texture.snap_to_float32();
    basis.tex_basis.snap_to_float32();
    basis.uv_coords.snap_to_float32();
    return basis;
}

std::vector<int> default_landmarks(const MorphableBasis& basis, int count) {
    const int v_count = basis.vertex_count();
    detail::require(count >= 1 && count <= v_count, "default_landmarks: bad count");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out.push_back(static_cast<int>(static_cast<std::int64_t>(i) * v_count / count));
    return out;
}

void save_basis(const std::string& path, const MorphableBasis& basis) {
    Uvt1Container c;
    c.add_f32("mean_shape", basis.mean_shape);
    c.add_f32("id_basis", basis.id_basis);
    c.add_f32("exp_basis", basis.exp_basis);
    c.add_f32("mean_texture", basis.mean_texture);
    c.add_f32("tex_basis", basis.tex_basis);
    c.add_i32("triangles", {basis.triangle_count(), 3}, basis.triangles);
    c.add_i32("mirror_map", {basis.vertex_count()}, basis.mirror_map);
    c.add_f32("uv_coords", basis.uv_coords);
    c.save(path);
}

MorphableBasis load_basis(const std::string& path) {
    const Uvt1Container c = Uvt1Container::load(path);
    MorphableBasis basis;
    basis.mean_shape = c.get_tensor("mean_shape");
    basis.id_basis = c.get_tensor("id_basis");
    basis.exp_basis = c.get_tensor("exp_basis");
    basis.mean_texture = c.get_tensor("mean_texture");
    basis.tex_basis = c.get_tensor("tex_basis");
    basis.triangles = c.get_i32("triangles");
    basis.mirror_map = c.get_i32("mirror_map");
    basis.uv_coords = c.get_tensor("uv_coords");
    return basis;
}

void save_coefficients(const std::string& path, const FaceCoefficients& coeffs) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("coefficients: cannot open '" + path + "' for writing");
    auto write_vec = [&f](const std::string& key, const std::vector<double>& v) {
        f << key << " =";
        for (double x : v) f << " " << format_double(x);
        f << "\n";
    };
    write_vec("alpha_id", coeffs.alpha_id);
    write_vec("alpha_exp", coeffs.alpha_exp);
    write_vec("alpha_tex", coeffs.alpha_tex);
    f << "projection =";
    for (std::int64_t i = 0; i < coeffs.projection.size(); ++i)
        f << " " << format_double(coeffs.projection[i]);
    f << "\n";
    if (!f) throw IoError("coefficients: write failed for '" + path + "'");
}

FaceCoefficients load_coefficients(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("coefficients: cannot open '" + path + "'");
    FaceCoefficients coeffs;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError("coefficients: malformed line '" + line + "'");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        std::istringstream values(line.substr(eq + 1));
        std::vector<double> v;
        std::string tok;
        while (values >> tok) v.push_back(parse_double(tok, key));
        if (key == "alpha_id") {
            coeffs.alpha_id = v;
        } else if (key == "alpha_exp") {
            coeffs.alpha_exp = v;
        } else if (key == "alpha_tex") {
            coeffs.alpha_tex = v;
        } else if (key == "projection") {
            if (v.size() != 12) throw IoError("coefficients: projection needs 12 values");
            coeffs.projection = Tensor::from_data({3, 4}, v);
        } else {
            throw IoError("coefficients: unknown key '" + key + "'");
        }
    }
    return coeffs;
}

} // namespace uvmt
