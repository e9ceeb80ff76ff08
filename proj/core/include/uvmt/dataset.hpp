/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/dataset.hpp
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

/// Procedural training data: UV textures painted from sampled makeup
/// parameters, with known-clean ground truth, strictly one-sided
/// contamination (so the mirror texel of any contaminated texel is clean by
/// construction), and sampled poses.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uvmt/morphable.hpp"
#include "uvmt/tensor.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

enum class DomainTag { Makeup, NonMakeup };

/// Sampled appearance of one face, all channels in [0,1].
struct MakeupParams {
    std::array<double, 3> lip_color{};
    std::array<double, 3> eye_color{};
    std::array<double, 3> skin_tone{};
};

struct SyntheticSample {
    FaceCoefficients coefficients;
    UVTexture clean_texture;
    UVTexture contaminated_texture; ///< equals clean outside contamination_mask exactly.
    Tensor contamination_mask;      ///< R x R in {0,1}.
    MakeupParams makeup;
    double yaw_deg = 0.0;
    double pitch_deg = 0.0;
    DomainTag domain = DomainTag::NonMakeup;

    bool contaminated() const;
};

struct DatasetOptions {
    int n_makeup = 32;
    int n_plain = 32;
    int uv_resolution = 128;  ///< even, >= 16.
    int image_size = 128;     ///< frame the sampled projections target.
    double contaminated_fraction = 0.3; ///< of makeup samples.
    double yaw_range_deg = 40.0;
    double pitch_range_deg = 10.0;
};

/// Deterministic in (options, seed): makeup samples first (the contaminated
/// ones leading), then plain samples. Occluder rectangles cover 5-20% of the
/// UV face area; shadow bands attenuate brightness by 30-70%; both stay
/// strictly inside one bilateral half.
std::vector<SyntheticSample> generate_dataset(const MorphableBasis& basis,
                                              const DatasetOptions& options, std::uint64_t seed);

/// Dataset container I/O (UVT1 records per sample plus a text manifest
/// record); tensors round-trip bit-exactly because generation snaps them to
/// float32.
void save_dataset(const std::string& path, const std::vector<SyntheticSample>& samples);
std::vector<SyntheticSample> load_dataset(const std::string& path);

} // namespace uvmt
