/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/histogram.hpp
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

/// Classic per-channel histogram matching between masked pixel sets, used
/// as the (gradient-free) target of the makeup loss.

#include "uvmt/tensor.hpp"

namespace uvmt {

struct HistogramSpec {
    int bins = 256;   ///< quantization levels; at least 2.
};

/// Remaps `source` (N x C pixel rows in [0,1]) so each channel's cumulative
/// distribution matches `reference` (M x C). Matching uses midpoint CDFs:
/// a source level maps to the smallest reference level whose CDF reaches the
/// source's half-open mass, so a constant source lands on the reference
/// median. Outputs are bin centers. Empty inputs are a contract error.
Tensor histogram_match(const Tensor& source, const Tensor& reference,
                       const HistogramSpec& spec = {});

/// Collects pixels of an H x W x C image where mask (H x W) is nonzero,
/// in row-major order, as an N x C matrix.
Tensor gather_masked(const Tensor& image, const Tensor& mask);

/// Returns a copy of `image` with the masked pixels replaced by `pixels`
/// (N x C, same order as gather_masked).
Tensor scatter_masked(const Tensor& image, const Tensor& mask, const Tensor& pixels);

/// Normalized per-channel histogram (sums to 1) of an N x C pixel matrix.
std::vector<double> channel_histogram(const Tensor& pixels, int channel, int bins);

} // namespace uvmt
