/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/region_masks.cpp
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
#include "uvmt/uv.hpp"

namespace uvmt {

namespace {

struct Ellipse {
    double cu, cv, ru, rv;

    bool contains(double u, double v) const {
        const double du = (u - cu) / ru, dv = (v - cv) / rv;
        return du * du + dv * dv <= 1.0;
    }
};

// Canonical layout: V runs chin (0) to forehead (1), U runs subject-right
// (0) to subject-left (1) with the midline at 0.5. All shapes are centered
// or paired symmetrically about u = 0.5 so the masks are exact mirror
// fixed points.
constexpr Ellipse kLips{0.5, 0.22, 0.14, 0.05};
constexpr Ellipse kEyeOuterL{0.32, 0.62, 0.10, 0.055};
constexpr Ellipse kEyeOuterR{0.68, 0.62, 0.10, 0.055};
constexpr Ellipse kEyeInnerL{0.32, 0.62, 0.06, 0.028};
constexpr Ellipse kEyeInnerR{0.68, 0.62, 0.06, 0.028};
constexpr Ellipse kFace{0.5, 0.45, 0.40, 0.42};

} // namespace

std::map<std::string, Tensor> builtin_region_masks_uv(int resolution) {
    detail::require(resolution > 0 && resolution % 2 == 0,
                    "region masks: resolution must be positive and even");
    Tensor lips({resolution, resolution});
    Tensor eye({resolution, resolution});
    Tensor face({resolution, resolution});
    for (int y = 0; y < resolution; ++y) {
        const double v = (y + 0.5) / resolution;
        for (int x = 0; x < resolution; ++x) {
            const double u = (x + 0.5) / resolution;
            const bool in_lips = kLips.contains(u, v);
            // Eye shadow region: annulus around each eye contour.
            const bool in_eye = (kEyeOuterL.contains(u, v) && !kEyeInnerL.contains(u, v)) ||
                                (kEyeOuterR.contains(u, v) && !kEyeInnerR.contains(u, v));
            const bool in_face = kFace.contains(u, v) && !in_lips && !in_eye &&
                                 !kEyeInnerL.contains(u, v) && !kEyeInnerR.contains(u, v);
            lips.at(y, x) = in_lips ? 1.0 : 0.0;
            eye.at(y, x) = in_eye ? 1.0 : 0.0;
            face.at(y, x) = in_face ? 1.0 : 0.0;
        }
    }
    std::map<std::string, Tensor> masks;
    masks.emplace("lips", std::move(lips));
    masks.emplace("eye", std::move(eye));
    masks.emplace("face", std::move(face));
    return masks;
}

} // namespace uvmt
