/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/histogram.cpp
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
#include "uvmt/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace uvmt {

namespace {

int to_level(double v, int bins) {
    const int l = static_cast<int>(std::floor(v * bins));
    return std::clamp(l, 0, bins - 1);
}

} // namespace

Tensor histogram_match(const Tensor& source, const Tensor& reference, const HistogramSpec& spec) {
    detail::require(spec.bins >= 2, "histogram_match: need at least 2 bins");
    detail::require(source.rank() == 2 && reference.rank() == 2 &&
                        source.dim(1) == reference.dim(1),
                    "histogram_match: pixel matrices must be N x C with equal C");
    detail::require(source.dim(0) > 0 && reference.dim(0) > 0,
                    "histogram_match: both regions must be nonempty");
    const int n = source.dim(0), m = reference.dim(0), channels = source.dim(1);
    const int bins = spec.bins;

    Tensor out({n, channels});
    std::vector<double> hist_src(static_cast<std::size_t>(bins));
    std::vector<double> cdf_ref(static_cast<std::size_t>(bins));
    std::vector<int> level_map(static_cast<std::size_t>(bins));

    for (int c = 0; c < channels; ++c) {
        std::fill(hist_src.begin(), hist_src.end(), 0.0);
        std::fill(cdf_ref.begin(), cdf_ref.end(), 0.0);
        for (int i = 0; i < n; ++i) hist_src[static_cast<std::size_t>(to_level(source.at(i, c), bins))] += 1.0;
        for (int i = 0; i < m; ++i) cdf_ref[static_cast<std::size_t>(to_level(reference.at(i, c), bins))] += 1.0;
        for (int l = 1; l < bins; ++l) cdf_ref[static_cast<std::size_t>(l)] += cdf_ref[static_cast<std::size_t>(l - 1)];
        for (int l = 0; l < bins; ++l) cdf_ref[static_cast<std::size_t>(l)] /= m;

        // Midpoint CDF of the source: each occupied level carries half its
        // own mass, which makes self-matching the identity and sends a
        // constant source to the reference median.
        double cum = 0.0;
        int j = 0;
        for (int l = 0; l < bins; ++l) {
            const double h = hist_src[static_cast<std::size_t>(l)];
            const double target = (cum + 0.5 * h) / n;
            cum += h;
            if (h == 0.0) {
                level_map[static_cast<std::size_t>(l)] = j;
                continue;
            }
            while (j < bins - 1 && cdf_ref[static_cast<std::size_t>(j)] < target) ++j;
            level_map[static_cast<std::size_t>(l)] = j;
        }

        for (int i = 0; i < n; ++i) {
            const int mapped = level_map[static_cast<std::size_t>(to_level(source.at(i, c), bins))];
            out.at(i, c) = (mapped + 0.5) / bins;
        }
    }
    return out;
}

Tensor gather_masked(const Tensor& image, const Tensor& mask) {
    detail::require(image.rank() == 3, "gather_masked: image must be H x W x C");
    detail::require(mask.rank() == 2 && mask.dim(0) == image.dim(0) && mask.dim(1) == image.dim(1),
                    "gather_masked: mask must match the image extent");
    const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
    int count = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(y, x) != 0.0) ++count;
    Tensor pixels({count, c});
    int i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask.at(y, x) == 0.0) continue;
            for (int ch = 0; ch < c; ++ch) pixels.at(i, ch) = image.at(y, x, ch);
            ++i;
        }
    return pixels;
}

Tensor scatter_masked(const Tensor& image, const Tensor& mask, const Tensor& pixels) {
    detail::require(image.rank() == 3, "scatter_masked: image must be H x W x C");
    detail::require(mask.rank() == 2 && mask.dim(0) == image.dim(0) && mask.dim(1) == image.dim(1),
                    "scatter_masked: mask must match the image extent");
    detail::require(pixels.rank() == 2 && pixels.dim(1) == image.dim(2),
                    "scatter_masked: pixels must be N x C");
    Tensor out = image;
    const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
    int i = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (mask.at(y, x) == 0.0) continue;
            detail::require(i < pixels.dim(0), "scatter_masked: fewer pixels than masked texels");
            for (int ch = 0; ch < c; ++ch) out.at(y, x, ch) = pixels.at(i, ch);
            ++i;
        }
    detail::require(i == pixels.dim(0), "scatter_masked: more pixels than masked texels");
    return out;
}

std::vector<double> channel_histogram(const Tensor& pixels, int channel, int bins) {
    detail::require(pixels.rank() == 2 && channel >= 0 && channel < pixels.dim(1),
                    "channel_histogram: bad pixel matrix or channel");
    detail::require(bins >= 2, "channel_histogram: need at least 2 bins");
    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    const int n = pixels.dim(0);
    if (n == 0) return hist;
    for (int i = 0; i < n; ++i) hist[static_cast<std::size_t>(to_level(pixels.at(i, channel), bins))] += 1.0;
    for (double& h : hist) h /= n;
    return hist;
}

} // namespace uvmt
