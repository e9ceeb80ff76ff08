/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/objectives.hpp
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

/// Training objectives: the region-wise histogram-matching makeup loss, a
/// frozen-feature perceptual loss, cycle consistency, the saturating
/// adversarial losses, and their weighted combination.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uvmt/autodiff.hpp"
#include "uvmt/histogram.hpp"
#include "uvmt/nn.hpp"
#include "uvmt/tensor.hpp"

namespace uvmt {

/// Trade-off weights. lambda1/2/3 weight the lips/eye/face makeup terms;
/// lambda_a/m/c/p weight the adversarial, makeup, cycle, and perceptual
/// parts of the total generator loss.
struct LossWeights {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 0.1;
    double lambda_a = 1.0;
    double lambda_m = 1.0;
    double lambda_c = 10.0;
    double lambda_p = 5e-3;
};

/// All weights must be nonnegative.
void validate_loss_weights(const LossWeights& weights);

/// Region-wise makeup loss on rendered images. For each region in
/// {lips, eye, face}, the masked pixels of `transferred` are histogram
/// matched against the same region of `reference`; the matched values form
/// a constant target (no gradient flows through the matching) and the term
/// is the mean squared error over the masked values, weighted by
/// lambda1/2/3 respectively.
///
/// `transferred` is an H x W x 3 image on a tape; `reference` an image of
/// the same shape; `region_masks` holds binary H x W masks rendered at the
/// same pose under the keys "lips", "eye", "face". Empty regions contribute
/// zero and their names are appended to `skipped` when given; all three
/// regions empty is a training error (degenerate render).
ad::Var makeup_loss(const ad::Var& transferred, const Tensor& reference,
                    const std::map<std::string, Tensor>& region_masks, const LossWeights& weights,
                    const HistogramSpec& spec = {}, std::vector<std::string>* skipped = nullptr);

/// Seed of the default frozen perceptual feature stack. Independent of the
/// training seed so perceptual distances are comparable across runs.
inline constexpr std::uint64_t kPerceptualSeed = 0x70657263ULL;

/// Frozen random convolutional feature extractor: three stride-2 3x3
/// convolutions with ReLU in between, mapping a 3 x H x W image to a
/// 512 x H/8 x W/8 feature map. Stands in for a pretrained backbone behind
/// the same interface.
class PerceptualExtractor {
  public:
    explicit PerceptualExtractor(std::uint64_t seed = kPerceptualSeed);

    /// Feature map of a 3 x H x W input; H and W must be multiples of 8.
    /// Parameters are always bound frozen.
    ad::Var features(nn::GraphContext& ctx, const ad::Var& image_chw) const;

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

  private:
    nn::ParamStore params_;
    nn::Conv2dLayer conv1_, conv2_, conv3_;
};

/// Mean squared distance between the frozen features of two images.
ad::Var perceptual_loss(nn::GraphContext& ctx, const PerceptualExtractor& extractor,
                        const ad::Var& a_chw, const ad::Var& b_chw);

/// Elementwise means; shapes must match.
ad::Var l1_loss(const ad::Var& a, const ad::Var& b);
ad::Var mse_loss(const ad::Var& a, const ad::Var& b);

/// Cycle consistency: per-texel mean L1 between each reconstruction and its
/// original, summed over both transfer directions.
ad::Var cycle_loss(const ad::Var& recon_src, const ad::Var& t_src, const ad::Var& recon_ref,
                   const ad::Var& t_ref);

/// Discriminator scores are clamped to [kScoreEps, 1 - kScoreEps] before
/// any logarithm.
inline constexpr double kScoreEps = 1e-6;

/// -mean log s over a score map (real samples, and the generator's
/// saturating objective on fakes).
ad::Var adv_real_term(const ad::Var& scores);
/// -mean log (1 - s) over a score map (fake samples seen by a
/// discriminator).
ad::Var adv_fake_term(const ad::Var& scores);

/// Two-domain discriminator loss: real terms on both domains' real scores
/// plus fake terms on both directions' generated scores.
ad::Var adv_discriminator_loss(const ad::Var& real_a, const ad::Var& real_b, const ad::Var& fake_a,
                               const ad::Var& fake_b);
/// Generator side: -mean log of the discriminators' scores on both
/// generated directions.
ad::Var adv_generator_loss(const ad::Var& fake_a, const ad::Var& fake_b);

/// L_G = lambda_a (L_G_tex + L_G_img) + lambda_m L_makeup
///     + lambda_c L_cycle + lambda_p L_per, on the tape.
ad::Var compose_generator_loss(const ad::Var& g_tex, const ad::Var& g_img, const ad::Var& makeup,
                               const ad::Var& cycle, const ad::Var& perceptual,
                               const LossWeights& weights);
/// L_D = lambda_a (L_D_tex + L_D_img), on the tape.
ad::Var compose_discriminator_loss(const ad::Var& d_tex, const ad::Var& d_img,
                                   const LossWeights& weights);

/// Scalar loss components as logged per step.
struct LossComponents {
    double g_tex = 0.0;
    double g_img = 0.0;
    double d_tex = 0.0;
    double d_img = 0.0;
    double makeup = 0.0;
    double cycle = 0.0;
    double perceptual = 0.0;
};

struct TotalLoss {
    double generator = 0.0;
    double discriminator = 0.0;
};

/// Plain-arithmetic combination of already-evaluated components; mirrors
/// compose_generator_loss / compose_discriminator_loss.
TotalLoss total_loss(const LossComponents& components, const LossWeights& weights);

} // namespace uvmt
