/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/include/uvmt/transfer_net.hpp
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

/// The UV-texture makeup transfer network: source/reference encoders, a
/// flip-attention repair stage for contaminated references, a spatial
/// attention transfer stage, a residual bottleneck with decoder, and three
/// patch discriminators (source-domain texture, reference-domain texture,
/// rendered image).

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uvmt/autodiff.hpp"
#include "uvmt/nn.hpp"
#include "uvmt/tensor.hpp"
#include "uvmt/uv.hpp"

namespace uvmt {

struct NetConfig {
    int uv_resolution = 128;   ///< texture side length; multiple of 8.
    int feature_channels = 64; ///< encoder output channels; multiple of 4.
    int residual_blocks = 3;
    int disc_channels = 32;    ///< first discriminator layer width.
};

void validate_net_config(const NetConfig& config);

/// Inference-time controls for generate().
struct TransferConfig {
    double w = 1.0;                        ///< shade weight in [0,1].
    bool fam_off = false;                  ///< bypass flip-attention repair.
    bool mtm_off = false;                  ///< bypass spatial attention.
    const Tensor* region_mask_uv = nullptr; ///< optional R x R partial-transfer mask.
};

/// Graph-level outputs of one generator pass.
struct GeneratorOutput {
    ad::Var texture;    ///< 3 x R x R in [0,1].
    ad::Var fam_mask;   ///< 1 x h x w in (0,1); invalid when fam_off.
    ad::Var attention;  ///< (h*w) x (h*w) row-stochastic; invalid when mtm_off.
    ad::Var makeup;     ///< F_m: C x h x w.
    ad::Var repaired;   ///< F̂_ref: C x h x w.
};

/// Plain-tensor inference result.
struct InferenceResult {
    UVTexture texture;   ///< generated texture; validity all ones.
    Tensor fam_mask;     ///< R x R (upsampled), empty when fam_off.
    Tensor attention;    ///< (h*w) x (h*w), empty when mtm_off.
};

enum class TextureDomain { Source, Reference };

class TransferNet {
  public:
    TransferNet(const NetConfig& config, std::uint64_t seed);

    const NetConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }
    int feature_size() const { return config_.uv_resolution / 4; }

    nn::ParamStore& generator_params() { return gen_params_; }
    const nn::ParamStore& generator_params() const { return gen_params_; }
    nn::ParamStore& discriminator_params() { return disc_params_; }
    const nn::ParamStore& discriminator_params() const { return disc_params_; }

    // --- graph-level pieces (x is a 3 x R x R Var on ctx's tape) ---

    ad::Var encode_source(nn::GraphContext& ctx, const ad::Var& texture,
                          bool trainable = true) const;
    ad::Var encode_reference(nn::GraphContext& ctx, const ad::Var& texture,
                             bool trainable = true) const;

    /// Flip-attention repair: predicts a confidence mask M from F_ref and
    /// blends the feature with its horizontal flip,
    /// F̂ = M ⊗ F + (1-M) ⊗ flip(F). Returns (F̂, M). Odd feature width is a
    /// contract error.
    std::pair<ad::Var, ad::Var> fam_repair(nn::GraphContext& ctx, const ad::Var& f_ref,
                                           bool trainable = true) const;

    /// Spatial attention transfer: F_a = row-softmax(F_p F_q) from 1x1
    /// projections of F_src; F_m = w * (F_a applied to F̂_ref), optionally
    /// masked by a UV region mask downsampled to feature resolution.
    /// Returns (F_m, F_a). Requires 0 <= w <= 1.
    std::pair<ad::Var, ad::Var> mtm_transfer(nn::GraphContext& ctx, const ad::Var& f_src,
                                             const ad::Var& f_hat_ref, double w,
                                             const Tensor* region_mask_uv = nullptr,
                                             bool trainable = true) const;

    /// Fusion + bottleneck + decoder: concat(F_src, F_m) down to a
    /// 3 x R x R texture through a bounded output activation.
    ad::Var decode(nn::GraphContext& ctx, const ad::Var& f_src, const ad::Var& f_m,
                   bool trainable = true) const;

    /// Full generator pass.
    GeneratorOutput generate(nn::GraphContext& ctx, const ad::Var& t_src, const ad::Var& t_ref,
                             const TransferConfig& config, bool trainable = true) const;

    /// Patch discriminator over a 3 x R x R texture; scores in (0,1) on a
    /// (R/8) x (R/8) grid.
    ad::Var discriminate_texture(nn::GraphContext& ctx, const ad::Var& texture,
                                 TextureDomain domain, bool trainable = true) const;
    /// Patch discriminator over a 3 x H x W rendered image.
    ad::Var discriminate_image(nn::GraphContext& ctx, const ad::Var& image,
                               bool trainable = true) const;

    // --- plain-tensor inference ---

    InferenceResult transfer(const UVTexture& source, const UVTexture& reference,
                             const TransferConfig& config) const;

    /// Two-reference interpolation: the makeup feature becomes
    /// interp_w * F_a ⊗ F̂_ref1 + (1 - interp_w) * F_a ⊗ F̂_ref2.
    InferenceResult transfer_interpolated(const UVTexture& source, const UVTexture& reference1,
                                          const UVTexture& reference2, double interp_w,
                                          const TransferConfig& config) const;

  private:
    ad::Var encode(nn::GraphContext& ctx, const ad::Var& texture, const nn::Conv2dLayer& c1,
                   const nn::Conv2dLayer& c2, bool trainable) const;
    ad::Var attention_map(nn::GraphContext& ctx, const ad::Var& f_src, bool trainable) const;
    ad::Var apply_region_mask(nn::GraphContext& ctx, const ad::Var& makeup,
                              const Tensor& region_mask_uv) const;
    ad::Var discriminate(nn::GraphContext& ctx, const ad::Var& input,
                         const std::array<nn::Conv2dLayer, 4>& stack, bool trainable) const;
    InferenceResult run_inference(const UVTexture& source, const UVTexture& reference,
                                  const UVTexture* reference2, double interp_w,
                                  const TransferConfig& config) const;

    NetConfig config_;
    std::uint64_t seed_ = 0;
    nn::ParamStore gen_params_;
    nn::ParamStore disc_params_;

    // generator layers
    nn::Conv2dLayer esrc1_, esrc2_;
    nn::Conv2dLayer eref1_, eref2_;
    nn::Conv2dLayer fam1_, fam2_;
    nn::Conv2dLayer mtm_p_, mtm_q_;
    nn::Conv2dLayer fuse_;
    std::vector<std::pair<nn::Conv2dLayer, nn::Conv2dLayer>> res_;
    nn::Conv2dLayer dec1_, dec2_, out_;

    // discriminators
    std::array<nn::Conv2dLayer, 4> d_tex_s_;
    std::array<nn::Conv2dLayer, 4> d_tex_r_;
    std::array<nn::Conv2dLayer, 4> d_img_;
};

/// Applies a row-stochastic attention matrix ((h*w) x (h*w)) to a C x h x w
/// feature, returning C x h x w.
ad::Var attend(const ad::Var& attention, const ad::Var& features);

/// Two-reference convex combination of attended features (see
/// TransferNet::transfer_interpolated); requires 0 <= w <= 1.
ad::Var interpolate_makeup(const ad::Var& attention, const ad::Var& f_hat1, const ad::Var& f_hat2,
                           double w);

/// Block-mean downsampling of an R x R mask by an integer factor.
Tensor downsample_mask_area(const Tensor& mask, int factor);

/// Nearest-neighbour upsampling of an h x w tensor by an integer factor.
Tensor upsample_nearest(const Tensor& t, int factor);

} // namespace uvmt
