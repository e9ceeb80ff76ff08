/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/objectives.cpp
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
#include "uvmt/objectives.hpp"

#include <array>

#include "uvmt/errors.hpp"
#include "uvmt/rng.hpp"

namespace uvmt {

namespace {

ad::Var zero_scalar(ad::Tape& tape) {
    return tape.leaf(Tensor::from_data({}, {0.0}));
}

ad::Var square(const ad::Var& a) {
    return ad::mul(a, a);
}

/// Replicates an H x W mask across three channels.
Tensor replicate3(const Tensor& mask) {
    const int h = mask.dim(0), w = mask.dim(1);
    Tensor out({h, w, 3});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = mask.at(y, x);
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = m;
        }
    return out;
}

int count_nonzero(const Tensor& mask) {
    int n = 0;
    for (std::int64_t i = 0; i < mask.size(); ++i)
        if (mask.data()[i] != 0.0) ++n;
    return n;
}

} // namespace

void validate_loss_weights(const LossWeights& weights) {
    const std::array<double, 7> values{weights.lambda1, weights.lambda2, weights.lambda3,
                                       weights.lambda_a, weights.lambda_m, weights.lambda_c,
                                       weights.lambda_p};
    for (double v : values)
        detail::require(v >= 0.0, "loss weights must be nonnegative");
}

ad::Var makeup_loss(const ad::Var& transferred, const Tensor& reference,
                    const std::map<std::string, Tensor>& region_masks, const LossWeights& weights,
                    const HistogramSpec& spec, std::vector<std::string>* skipped) {
    validate_loss_weights(weights);
    detail::require(transferred.valid(), "makeup_loss: invalid image node");
    // Copy, do not alias: growing the tape below reallocates node storage,
    // which would invalidate a reference obtained from value().
    const Tensor image = transferred.value();
    detail::require(image.rank() == 3 && image.dim(2) == 3,
                    "makeup_loss: image must be H x W x 3");
    detail::require(reference.shape() == image.shape(),
                    "makeup_loss: reference shape mismatch");

    const std::array<std::pair<const char*, double>, 3> items{
        {{"lips", weights.lambda1}, {"eye", weights.lambda2}, {"face", weights.lambda3}}};

    ad::Tape& tape = *transferred.tape();
    ad::Var total = zero_scalar(tape);
    int live_regions = 0;
    for (const auto& [name, lambda] : items) {
        const auto it = region_masks.find(name);
        detail::require(it != region_masks.end(),
                        std::string("makeup_loss: missing region mask '") + name + "'");
        const Tensor& mask = it->second;
        detail::require(mask.rank() == 2 && mask.dim(0) == image.dim(0) &&
                            mask.dim(1) == image.dim(1),
                        "makeup_loss: region mask extent mismatch");
        const int n = count_nonzero(mask);
        if (n == 0) {
            if (skipped != nullptr) skipped->push_back(name);
            continue;
        }
        ++live_regions;

        // Histogram matching runs on plain values; the matched image is a
        // constant target so no gradient flows through the matching itself.
        const Tensor src_pixels = gather_masked(image, mask);
        const Tensor ref_pixels = gather_masked(reference, mask);
        const Tensor matched = histogram_match(src_pixels, ref_pixels, spec);
        const Tensor target = scatter_masked(image, mask, matched);

        ad::Var diff = ad::sub(transferred, tape.leaf(target));
        ad::Var masked_sq = ad::mul_const(square(diff), replicate3(mask));
        ad::Var term = ad::affine(ad::sum_all(masked_sq), lambda / (3.0 * n), 0.0);
        total = ad::add(total, term);
    }
    if (live_regions == 0)
        throw TrainingError("makeup_loss: every region mask is empty (degenerate render)", "");
    return total;
}

PerceptualExtractor::PerceptualExtractor(std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed, 0);
    conv1_ = nn::Conv2dLayer::create(params_, "P.1", 3, 32, 3, 2, 1, rng);
    conv2_ = nn::Conv2dLayer::create(params_, "P.2", 32, 64, 3, 2, 1, rng);
    conv3_ = nn::Conv2dLayer::create(params_, "P.3", 64, 512, 3, 2, 1, rng);
}

ad::Var PerceptualExtractor::features(nn::GraphContext& ctx, const ad::Var& image_chw) const {
    const Tensor& v = image_chw.value();
    detail::require(v.rank() == 3 && v.dim(0) == 3, "perceptual: input must be 3 x H x W");
    detail::require(v.dim(1) % 8 == 0 && v.dim(2) % 8 == 0 && v.dim(1) >= 8 && v.dim(2) >= 8,
                    "perceptual: spatial extents must be multiples of 8");
    ad::Var h1 = ad::relu(conv1_(ctx, image_chw, /*trainable=*/false));
    ad::Var h2 = ad::relu(conv2_(ctx, h1, /*trainable=*/false));
    return conv3_(ctx, h2, /*trainable=*/false);
}

ad::Var perceptual_loss(nn::GraphContext& ctx, const PerceptualExtractor& extractor,
                        const ad::Var& a_chw, const ad::Var& b_chw) {
    ad::Var fa = extractor.features(ctx, a_chw);
    ad::Var fb = extractor.features(ctx, b_chw);
    return mse_loss(fa, fb);
}

ad::Var l1_loss(const ad::Var& a, const ad::Var& b) {
    return ad::mean_all(ad::abs(ad::sub(a, b)));
}

ad::Var mse_loss(const ad::Var& a, const ad::Var& b) {
    return ad::mean_all(square(ad::sub(a, b)));
}

ad::Var cycle_loss(const ad::Var& recon_src, const ad::Var& t_src, const ad::Var& recon_ref,
                   const ad::Var& t_ref) {
    return ad::add(l1_loss(recon_src, t_src), l1_loss(recon_ref, t_ref));
}

ad::Var adv_real_term(const ad::Var& scores) {
    ad::Var safe = ad::clamp(scores, kScoreEps, 1.0 - kScoreEps);
    return ad::affine(ad::mean_all(ad::log(safe)), -1.0, 0.0);
}

ad::Var adv_fake_term(const ad::Var& scores) {
    ad::Var safe = ad::clamp(scores, kScoreEps, 1.0 - kScoreEps);
    ad::Var one_minus = ad::affine(safe, -1.0, 1.0);
    return ad::affine(ad::mean_all(ad::log(one_minus)), -1.0, 0.0);
}

ad::Var adv_discriminator_loss(const ad::Var& real_a, const ad::Var& real_b, const ad::Var& fake_a,
                               const ad::Var& fake_b) {
    ad::Var real = ad::add(adv_real_term(real_a), adv_real_term(real_b));
    ad::Var fake = ad::add(adv_fake_term(fake_a), adv_fake_term(fake_b));
    return ad::add(real, fake);
}

ad::Var adv_generator_loss(const ad::Var& fake_a, const ad::Var& fake_b) {
    return ad::add(adv_real_term(fake_a), adv_real_term(fake_b));
}

ad::Var compose_generator_loss(const ad::Var& g_tex, const ad::Var& g_img, const ad::Var& makeup,
                               const ad::Var& cycle, const ad::Var& perceptual,
                               const LossWeights& weights) {
    validate_loss_weights(weights);
    ad::Var adv = ad::affine(ad::add(g_tex, g_img), weights.lambda_a, 0.0);
    ad::Var total = ad::add(adv, ad::affine(makeup, weights.lambda_m, 0.0));
    total = ad::add(total, ad::affine(cycle, weights.lambda_c, 0.0));
    return ad::add(total, ad::affine(perceptual, weights.lambda_p, 0.0));
}

ad::Var compose_discriminator_loss(const ad::Var& d_tex, const ad::Var& d_img,
                                   const LossWeights& weights) {
    validate_loss_weights(weights);
    return ad::affine(ad::add(d_tex, d_img), weights.lambda_a, 0.0);
}

TotalLoss total_loss(const LossComponents& components, const LossWeights& weights) {
    validate_loss_weights(weights);
    TotalLoss out;
    out.generator = weights.lambda_a * (components.g_tex + components.g_img) +
                    weights.lambda_m * components.makeup + weights.lambda_c * components.cycle +
                    weights.lambda_p * components.perceptual;
    out.discriminator = weights.lambda_a * (components.d_tex + components.d_img);
    return out;
}

} // namespace uvmt
