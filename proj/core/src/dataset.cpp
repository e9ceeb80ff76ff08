/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/dataset.cpp
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
#include "uvmt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "uvmt/container.hpp"
#include "uvmt/errors.hpp"
#include "uvmt/rng.hpp"

namespace uvmt {

namespace {

constexpr std::uint64_t kDatasetStream = 0x64617461ULL; // dataset substream tag

double snap32(double v) { return static_cast<double>(static_cast<float>(v)); }

void snap_array(std::array<double, 3>& a) {
    for (double& v : a) v = snap32(v);
}

void snap_coeff_vector(std::vector<double>& v) {
    for (double& x : v) x = snap32(x);
}

std::vector<double> sample_coeffs(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out(static_cast<std::size_t>(k));
    for (double& v : out) v = std::clamp(normal(rng), -kDefaultCoeffClamp, kDefaultCoeffClamp);
    return out;
}

/// Low-frequency multiplicative texture variation so faces are not flat.
struct VariationField {
    std::array<double, 3> amp{};
    std::array<int, 3> pu{};
    std::array<int, 3> pv{};
    std::array<double, 3> phase{};

    static VariationField sample(std::mt19937_64& rng) {
        std::uniform_real_distribution<double> amp_dist(-0.02, 0.02);
        std::uniform_int_distribution<int> freq(0, 2);
        std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
        VariationField f;
        for (int k = 0; k < 3; ++k) {
            f.amp[static_cast<std::size_t>(k)] = amp_dist(rng);
            f.pu[static_cast<std::size_t>(k)] = freq(rng);
            f.pv[static_cast<std::size_t>(k)] = freq(rng);
            f.phase[static_cast<std::size_t>(k)] = phase_dist(rng);
        }
        return f;
    }

    double operator()(double u, double v) const {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const auto i = static_cast<std::size_t>(k);
            s += amp[i] * std::cos(2.0 * std::numbers::pi * (pu[i] * u + pv[i] * v) + phase[i]);
        }
        return s;
    }
};

/// One-sided occluder rectangle: a dark block confined to the chosen half.
void paint_occluder(UVTexture& texture, Tensor& mask, bool left_half, double area_fraction,
                    double aspect, const std::array<double, 3>& color, int face_area,
                    const std::vector<std::pair<int, int>>& half_face_texels,
                    std::size_t center_pick) {
    const int res = texture.resolution();
    const int half_lo = left_half ? 0 : res / 2;
    const int half_hi = left_half ? res / 2 - 1 : res - 1;

    const double target = area_fraction * face_area;
    int w = std::max(1, static_cast<int>(std::lround(std::sqrt(target * aspect))));
    w = std::min(w, res / 2);
    int h = std::max(1, static_cast<int>(std::lround(target / w)));
    h = std::min(h, res);

    const auto [cy, cx] = half_face_texels[center_pick % half_face_texels.size()];
    int x0 = std::clamp(cx - w / 2, half_lo, half_hi - w + 1);
    int y0 = std::clamp(cy - h / 2, 0, res - h);
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) {
            for (int c = 0; c < 3; ++c)
                texture.pixels.at(y, x, c) = color[static_cast<std::size_t>(c)];
            mask.at(y, x) = 1.0;
        }
}

/// One-sided shadow band: brightness ramps down toward the outer edge of
/// the chosen half.
void paint_shadow(UVTexture& texture, Tensor& mask, bool left_half, double band_fraction,
                  double strength) {
    const int res = texture.resolution();
    const int band = std::max(2, static_cast<int>(std::lround(band_fraction * res)));
    for (int x = 0; x < band; ++x) {
        // Depth 1 at the image border, 0 at the inner edge of the band.
        const double depth = 1.0 - static_cast<double>(x) / band;
        const double factor = 1.0 - strength * depth;
        if (factor >= 1.0) continue;
        const int col = left_half ? x : res - 1 - x;
        for (int y = 0; y < res; ++y) {
            for (int c = 0; c < 3; ++c) texture.pixels.at(y, col, c) *= factor;
            mask.at(y, col) = 1.0;
        }
    }
}

std::string record_prefix(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "s%04zu", index);
    return buf;
}

} // namespace

bool SyntheticSample::contaminated() const {
    for (std::int64_t i = 0; i < contamination_mask.size(); ++i)
        if (contamination_mask.data()[i] != 0.0) return true;
    return false;
}

std::vector<SyntheticSample> generate_dataset(const MorphableBasis& basis,
                                              const DatasetOptions& options, std::uint64_t seed) {
    detail::require(options.n_makeup >= 1 && options.n_plain >= 1,
                    "generate_dataset: n_makeup and n_plain must be >= 1");
    detail::require(options.uv_resolution >= 16 && options.uv_resolution % 2 == 0,
                    "generate_dataset: uv_resolution must be even and >= 16");
    detail::require(options.contaminated_fraction >= 0.0 && options.contaminated_fraction <= 1.0,
                    "generate_dataset: contaminated_fraction must lie in [0,1]");

    const int res = options.uv_resolution;
    const auto masks = builtin_region_masks_uv(res);
    const Tensor& lips = masks.at("lips");
    const Tensor& eye = masks.at("eye");
    const Tensor& face = masks.at("face");

    // Face-region texel census, used to size occluders; split per half for
    // placing their centers.
    int face_area = 0;
    std::vector<std::pair<int, int>> left_face, right_face;
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x) {
            if (lips.at(y, x) == 0.0 && eye.at(y, x) == 0.0 && face.at(y, x) == 0.0) continue;
            ++face_area;
            (x < res / 2 ? left_face : right_face).emplace_back(y, x);
        }
    detail::require(face_area > 0 && !left_face.empty() && !right_face.empty(),
                    "generate_dataset: empty region masks");

    const int total = options.n_makeup + options.n_plain;
    const int n_contaminated =
        static_cast<int>(std::lround(options.contaminated_fraction * options.n_makeup));

    std::vector<SyntheticSample> samples;
    samples.reserve(static_cast<std::size_t>(total));
    const std::uint64_t dataset_seed = mix_seed(seed, kDatasetStream);

    for (int index = 0; index < total; ++index) {
        std::mt19937_64 rng = make_rng(dataset_seed, static_cast<std::uint64_t>(index));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        SyntheticSample s;
        s.domain = index < options.n_makeup ? DomainTag::Makeup : DomainTag::NonMakeup;

        // Geometry and pose.
        s.coefficients.alpha_id = sample_coeffs(basis.k_id(), rng);
        s.coefficients.alpha_exp = sample_coeffs(basis.k_exp(), rng);
        s.coefficients.alpha_tex.assign(static_cast<std::size_t>(basis.k_tex()), 0.0);
        s.yaw_deg = snap32((2.0 * unit(rng) - 1.0) * options.yaw_range_deg);
        s.pitch_deg = snap32((2.0 * unit(rng) - 1.0) * options.pitch_range_deg);
        const double size = options.image_size;
        const double scale = (0.33 + 0.07 * unit(rng)) * size;
        const double tx = (0.5 + 0.06 * (unit(rng) - 0.5)) * size;
        const double ty = (0.5 + 0.06 * (unit(rng) - 0.5)) * size;
        s.coefficients.projection =
            make_weak_perspective(scale, s.yaw_deg, s.pitch_deg, 0.0, tx, ty, /*y_down=*/true);

        // Appearance.
        const double lum = 0.45 + 0.40 * unit(rng);
        s.makeup.skin_tone = {lum, lum * (0.78 + 0.10 * unit(rng)), lum * (0.60 + 0.16 * unit(rng))};
        if (s.domain == DomainTag::Makeup) {
            s.makeup.lip_color = {0.50 + 0.40 * unit(rng), 0.05 + 0.25 * unit(rng),
                                  0.15 + 0.35 * unit(rng)};
            s.makeup.eye_color = {0.10 + 0.60 * unit(rng), 0.10 + 0.60 * unit(rng),
                                  0.10 + 0.60 * unit(rng)};
        } else {
            // Bare lips keep a muted natural tint; no eye shadow.
            s.makeup.lip_color = {s.makeup.skin_tone[0] * 0.85, s.makeup.skin_tone[1] * 0.62,
                                  s.makeup.skin_tone[2] * 0.60};
            s.makeup.eye_color = s.makeup.skin_tone;
        }
        snap_array(s.makeup.lip_color);
        snap_array(s.makeup.eye_color);
        snap_array(s.makeup.skin_tone);
        const VariationField variation = VariationField::sample(rng);

        // Paint the clean texture.
        s.clean_texture.pixels = Tensor({res, res, 3});
        s.clean_texture.validity = Tensor::ones({res, res});
        for (int y = 0; y < res; ++y) {
            const double v = (y + 0.5) / res;
            for (int x = 0; x < res; ++x) {
                const double u = (x + 0.5) / res;
                const double theta = (u - 0.5) * std::numbers::pi;
                const double shade = (0.90 + 0.12 * v) * (0.92 + 0.08 * std::cos(theta)) *
                                     (1.0 + variation(u, v));
                const bool in_lips = lips.at(y, x) != 0.0;
                const bool in_eye = eye.at(y, x) != 0.0;
                for (int c = 0; c < 3; ++c) {
                    const auto ci = static_cast<std::size_t>(c);
                    double value;
                    if (in_lips) {
                        value = s.makeup.lip_color[ci];
                    } else if (in_eye && s.domain == DomainTag::Makeup) {
                        value = s.makeup.eye_color[ci];
                    } else {
                        value = s.makeup.skin_tone[ci] * shade;
                    }
                    s.clean_texture.pixels.at(y, x, c) = std::clamp(value, 0.0, 1.0);
                }
            }
        }
        s.clean_texture.pixels.snap_to_float32();

        // Contamination: only the leading makeup samples, one half each.
        s.contamination_mask = Tensor({res, res});
        s.contaminated_texture = s.clean_texture;
        if (s.domain == DomainTag::Makeup && index < n_contaminated) {
            const bool left_half = unit(rng) < 0.5;
            const bool occluder = unit(rng) < 0.5;
            if (occluder) {
                const double area_fraction = 0.05 + 0.15 * unit(rng);
                const double aspect = 0.5 + 1.5 * unit(rng);
                const std::array<double, 3> color{0.02 + 0.23 * unit(rng),
                                                  0.02 + 0.23 * unit(rng),
                                                  0.02 + 0.23 * unit(rng)};
                const auto pick = static_cast<std::size_t>(
                    unit(rng) * 4096.0); // index into the half's face texels
                paint_occluder(s.contaminated_texture, s.contamination_mask, left_half,
                               area_fraction, aspect, color, face_area,
                               left_half ? left_face : right_face, pick);
            } else {
                const double band_fraction = 0.25 + 0.20 * unit(rng);
                const double strength = 0.30 + 0.40 * unit(rng);
                paint_shadow(s.contaminated_texture, s.contamination_mask, left_half,
                             band_fraction, strength);
            }
            s.contaminated_texture.pixels.snap_to_float32();
        }

        snap_coeff_vector(s.coefficients.alpha_id);
        snap_coeff_vector(s.coefficients.alpha_exp);
        s.coefficients.projection.snap_to_float32();
        samples.push_back(std::move(s));
    }
    return samples;
}

void save_dataset(const std::string& path, const std::vector<SyntheticSample>& samples) {
    detail::require(!samples.empty(), "save_dataset: empty sample list");
    Uvt1Container container;
    std::ostringstream manifest;
    manifest << "count = " << samples.size() << "\n"
             << "uv_resolution = " << samples.front().clean_texture.resolution() << "\n";
    const std::string text = manifest.str();
    container.add_u8("manifest", {static_cast<int>(text.size())},
                     std::vector<std::uint8_t>(text.begin(), text.end()));

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SyntheticSample& s = samples[i];
        const std::string p = record_prefix(i);
        container.add_f32(p + ".clean", s.clean_texture.pixels);
        container.add_f32(p + ".cont", s.contaminated_texture.pixels);
        std::vector<std::uint8_t> mask_bytes(static_cast<std::size_t>(s.contamination_mask.size()));
        for (std::int64_t j = 0; j < s.contamination_mask.size(); ++j)
            mask_bytes[static_cast<std::size_t>(j)] =
                s.contamination_mask.data()[j] != 0.0 ? 1 : 0;
        container.add_u8(p + ".mask", s.contamination_mask.shape(), mask_bytes);
        container.add_f32(p + ".alpha_id", {static_cast<int>(s.coefficients.alpha_id.size())},
                          s.coefficients.alpha_id.data());
        container.add_f32(p + ".alpha_exp", {static_cast<int>(s.coefficients.alpha_exp.size())},
                          s.coefficients.alpha_exp.data());
        container.add_f32(p + ".alpha_tex", {static_cast<int>(s.coefficients.alpha_tex.size())},
                          s.coefficients.alpha_tex.data());
        container.add_f32(p + ".projection", s.coefficients.projection);
        const std::vector<double> meta{
            s.yaw_deg,
            s.pitch_deg,
            s.domain == DomainTag::Makeup ? 1.0 : 0.0,
            s.makeup.lip_color[0],
            s.makeup.lip_color[1],
            s.makeup.lip_color[2],
            s.makeup.eye_color[0],
            s.makeup.eye_color[1],
            s.makeup.eye_color[2],
            s.makeup.skin_tone[0],
            s.makeup.skin_tone[1],
            s.makeup.skin_tone[2]};
        container.add_f32(p + ".meta", {static_cast<int>(meta.size())}, meta.data());
    }
    container.save(path);
}

std::vector<SyntheticSample> load_dataset(const std::string& path) {
    const Uvt1Container container = Uvt1Container::load(path);
    if (!container.has("manifest")) throw IoError("dataset missing manifest record: " + path);
    const auto manifest_bytes = container.get_u8("manifest");
    const std::string text(manifest_bytes.begin(), manifest_bytes.end());

    std::size_t count = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        std::istringstream parts(line);
        std::string key, eq;
        if (!(parts >> key >> eq) || eq != "=") continue;
        if (key == "count") parts >> count;
    }
    if (count == 0) throw IoError("dataset manifest has no sample count: " + path);

    std::vector<SyntheticSample> samples;
    samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::string p = record_prefix(i);
        SyntheticSample s;
        s.clean_texture.pixels = container.get_tensor(p + ".clean");
        const int res = s.clean_texture.pixels.dim(0);
        s.clean_texture.validity = Tensor::ones({res, res});
        s.contaminated_texture.pixels = container.get_tensor(p + ".cont");
        s.contaminated_texture.validity = Tensor::ones({res, res});
        s.contamination_mask = container.get_tensor(p + ".mask");

        const Tensor alpha_id = container.get_tensor(p + ".alpha_id");
        const Tensor alpha_exp = container.get_tensor(p + ".alpha_exp");
        const Tensor alpha_tex = container.get_tensor(p + ".alpha_tex");
        s.coefficients.alpha_id.assign(alpha_id.data(), alpha_id.data() + alpha_id.size());
        s.coefficients.alpha_exp.assign(alpha_exp.data(), alpha_exp.data() + alpha_exp.size());
        s.coefficients.alpha_tex.assign(alpha_tex.data(), alpha_tex.data() + alpha_tex.size());
        s.coefficients.projection = container.get_tensor(p + ".projection");

        const Tensor meta = container.get_tensor(p + ".meta");
        detail::require(meta.size() == 12, "dataset meta record must hold 12 values");
        s.yaw_deg = meta.data()[0];
        s.pitch_deg = meta.data()[1];
        s.domain = meta.data()[2] != 0.0 ? DomainTag::Makeup : DomainTag::NonMakeup;
        for (int c = 0; c < 3; ++c) {
            const auto ci = static_cast<std::size_t>(c);
            s.makeup.lip_color[ci] = meta.data()[3 + c];
            s.makeup.eye_color[ci] = meta.data()[6 + c];
            s.makeup.skin_tone[ci] = meta.data()[9 + c];
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace uvmt
