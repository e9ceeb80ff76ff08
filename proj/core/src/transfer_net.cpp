/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: core/src/transfer_net.cpp
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
#include "uvmt/transfer_net.hpp"

#include "uvmt/rng.hpp"

namespace uvmt {

void validate_net_config(const NetConfig& config) {
    detail::require(config.uv_resolution >= 32 && config.uv_resolution % 8 == 0,
                    "net config: uv_resolution must be a multiple of 8 and at least 32");
    detail::require(config.feature_channels >= 8 && config.feature_channels % 4 == 0,
                    "net config: feature_channels must be a multiple of 4 and at least 8");
    detail::require(config.residual_blocks >= 1, "net config: need at least one residual block");
    detail::require(config.disc_channels >= 4, "net config: disc_channels too small");
}

namespace {

std::array<nn::Conv2dLayer, 4> make_discriminator(nn::ParamStore& store, const std::string& name,
                                                  int base, std::mt19937_64& rng) {
    // Three stride-2 stages shrink the input by 8x; the head keeps the patch
    // grid and maps to a single sigmoid score channel.
    return {nn::Conv2dLayer::create(store, name + ".1", 3, base, 4, 2, 1, rng),
            nn::Conv2dLayer::create(store, name + ".2", base, 2 * base, 4, 2, 1, rng),
            nn::Conv2dLayer::create(store, name + ".3", 2 * base, 4 * base, 4, 2, 1, rng),
            nn::Conv2dLayer::create(store, name + ".head", 4 * base, 1, 3, 1, 1, rng)};
}

} // namespace

TransferNet::TransferNet(const NetConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed) {
    validate_net_config(config_);
    const int c = config_.feature_channels;

    // One deterministic stream drives every initializer, in declaration
    // order, so (config, seed) fully determines the network.
    auto rng = make_rng(seed, 0x756e6574ULL);

    esrc1_ = nn::Conv2dLayer::create(gen_params_, "G.esrc1", 3, c / 2, 4, 2, 1, rng);
    esrc2_ = nn::Conv2dLayer::create(gen_params_, "G.esrc2", c / 2, c, 4, 2, 1, rng);
    eref1_ = nn::Conv2dLayer::create(gen_params_, "G.eref1", 3, c / 2, 4, 2, 1, rng);
    eref2_ = nn::Conv2dLayer::create(gen_params_, "G.eref2", c / 2, c, 4, 2, 1, rng);

    fam1_ = nn::Conv2dLayer::create(gen_params_, "G.fam1", c, c / 2, 3, 1, 1, rng);
    // Small init keeps the untrained mask near 0.5 (no learned signal).
    fam2_ = nn::Conv2dLayer::create(gen_params_, "G.fam2", c / 2, 1, 3, 1, 1, rng, 0.01);

    mtm_p_ = nn::Conv2dLayer::create(gen_params_, "G.mtm_p", c, c / 2, 1, 1, 0, rng);
    mtm_q_ = nn::Conv2dLayer::create(gen_params_, "G.mtm_q", c, c / 2, 1, 1, 0, rng);

    fuse_ = nn::Conv2dLayer::create(gen_params_, "G.fuse", 2 * c, c, 3, 1, 1, rng);
    for (int i = 0; i < config_.residual_blocks; ++i) {
        const std::string base = "G.res" + std::to_string(i + 1);
        res_.emplace_back(nn::Conv2dLayer::create(gen_params_, base + "a", c, c, 3, 1, 1, rng),
                          nn::Conv2dLayer::create(gen_params_, base + "b", c, c, 3, 1, 1, rng));
    }
    dec1_ = nn::Conv2dLayer::create(gen_params_, "G.dec1", c, c / 2, 3, 1, 1, rng);
    dec2_ = nn::Conv2dLayer::create(gen_params_, "G.dec2", c / 2, c / 4, 3, 1, 1, rng);
    out_ = nn::Conv2dLayer::create(gen_params_, "G.out", c / 4, 3, 3, 1, 1, rng);

    d_tex_s_ = make_discriminator(disc_params_, "D.texS", config_.disc_channels, rng);
    d_tex_r_ = make_discriminator(disc_params_, "D.texR", config_.disc_channels, rng);
    d_img_ = make_discriminator(disc_params_, "D.img", config_.disc_channels, rng);
}

ad::Var TransferNet::encode(nn::GraphContext& ctx, const ad::Var& texture,
                            const nn::Conv2dLayer& c1, const nn::Conv2dLayer& c2,
                            bool trainable) const {
    const Tensor& v = texture.value();
    detail::require(v.rank() == 3 && v.dim(0) == 3 && v.dim(1) == config_.uv_resolution &&
                        v.dim(2) == config_.uv_resolution,
                    "encode: texture must be 3 x R x R at the configured resolution");
    return ad::relu(c2(ctx, ad::relu(c1(ctx, texture, trainable)), trainable));
}

ad::Var TransferNet::encode_source(nn::GraphContext& ctx, const ad::Var& texture,
                                   bool trainable) const {
    return encode(ctx, texture, esrc1_, esrc2_, trainable);
}

ad::Var TransferNet::encode_reference(nn::GraphContext& ctx, const ad::Var& texture,
                                      bool trainable) const {
    return encode(ctx, texture, eref1_, eref2_, trainable);
}

std::pair<ad::Var, ad::Var> TransferNet::fam_repair(nn::GraphContext& ctx, const ad::Var& f_ref,
                                                    bool trainable) const {
    const Tensor& v = f_ref.value();
    detail::require(v.rank() == 3, "fam_repair: feature must be C x h x w");
    detail::require(v.dim(2) % 2 == 0, "fam_repair: feature width must be even");
    const ad::Var mask = ad::sigmoid(fam2_(ctx, ad::relu(fam1_(ctx, f_ref, trainable)), trainable));
    const ad::Var flipped = ad::flip_axis(f_ref, 2);
    const ad::Var inverse = ad::affine(mask, -1.0, 1.0);
    const ad::Var repaired =
        ad::add(ad::mul_bcast_c(mask, f_ref), ad::mul_bcast_c(inverse, flipped));
    return {repaired, mask};
}

ad::Var attend(const ad::Var& attention, const ad::Var& features) {
    const Tensor& f = features.value();
    detail::require(f.rank() == 3, "attend: features must be C x h x w");
    const int c = f.dim(0), h = f.dim(1), w = f.dim(2);
    const int hw = h * w;
    const Tensor& a = attention.value();
    detail::require(a.rank() == 2 && a.dim(0) == hw && a.dim(1) == hw,
                    "attend: attention must be (h*w) x (h*w)");
    // positions x channels = attention * (positions x channels)
    const ad::Var flat = ad::transpose2d(ad::reshape(features, {c, hw}));
    const ad::Var mixed = ad::matmul(attention, flat);
    return ad::reshape(ad::transpose2d(mixed), {c, h, w});
}

ad::Var TransferNet::attention_map(nn::GraphContext& ctx, const ad::Var& f_src,
                                   bool trainable) const {
    const Tensor& f = f_src.value();
    detail::require(f.rank() == 3, "attention_map: feature must be C x h x w");
    const int c = f.dim(0), hw = f.dim(1) * f.dim(2);
    const ad::Var p = mtm_p_(ctx, f_src, trainable);
    const ad::Var q = mtm_q_(ctx, f_src, trainable);
    const ad::Var p_flat = ad::transpose2d(ad::reshape(p, {c / 2, hw}));  // hw x c/2
    const ad::Var q_flat = ad::reshape(q, {c / 2, hw});                   // c/2 x hw
    return ad::softmax_rows(ad::matmul(p_flat, q_flat));
}

ad::Var TransferNet::apply_region_mask(nn::GraphContext& ctx, const ad::Var& makeup,
                                       const Tensor& region_mask_uv) const {
    const Tensor& f = makeup.value();
    const int h = f.dim(1), w = f.dim(2);
    detail::require(region_mask_uv.rank() == 2 && region_mask_uv.dim(0) == config_.uv_resolution &&
                        region_mask_uv.dim(1) == config_.uv_resolution,
                    "region mask must be R x R at the configured resolution");
    const Tensor small = downsample_mask_area(region_mask_uv, config_.uv_resolution / h);
    return ad::mul_bcast_c(ctx.tape().leaf(small.reshaped({1, h, w}), false), makeup);
}

std::pair<ad::Var, ad::Var> TransferNet::mtm_transfer(nn::GraphContext& ctx, const ad::Var& f_src,
                                                      const ad::Var& f_hat_ref, double w,
                                                      const Tensor* region_mask_uv,
                                                      bool trainable) const {
    detail::require(w >= 0.0 && w <= 1.0, "mtm_transfer: shade weight must be in [0,1]");
    detail::require(f_src.value().same_shape(f_hat_ref.value()),
                    "mtm_transfer: source/reference feature shapes differ");
    const ad::Var attention = attention_map(ctx, f_src, trainable);
    ad::Var makeup = ad::affine(attend(attention, f_hat_ref), w, 0.0);
    if (region_mask_uv != nullptr) makeup = apply_region_mask(ctx, makeup, *region_mask_uv);
    return {makeup, attention};
}

ad::Var interpolate_makeup(const ad::Var& attention, const ad::Var& f_hat1, const ad::Var& f_hat2,
                           double w) {
    detail::require(w >= 0.0 && w <= 1.0, "interpolate_makeup: weight must be in [0,1]");
    return ad::add(ad::affine(attend(attention, f_hat1), w, 0.0),
                   ad::affine(attend(attention, f_hat2), 1.0 - w, 0.0));
}

ad::Var TransferNet::decode(nn::GraphContext& ctx, const ad::Var& f_src, const ad::Var& f_m,
                            bool trainable) const {
    ad::Var x = ad::relu(fuse_(ctx, ad::concat_c(f_src, f_m), trainable));
    for (const auto& [conv_a, conv_b] : res_)
        x = ad::add(x, conv_b(ctx, ad::relu(conv_a(ctx, x, trainable)), trainable));
    x = ad::relu(dec1_(ctx, ad::upsample_nearest2(x), trainable));
    x = ad::relu(dec2_(ctx, ad::upsample_nearest2(x), trainable));
    return ad::sigmoid(out_(ctx, x, trainable));
}

GeneratorOutput TransferNet::generate(nn::GraphContext& ctx, const ad::Var& t_src,
                                      const ad::Var& t_ref, const TransferConfig& config,
                                      bool trainable) const {
    detail::require(t_src.value().same_shape(t_ref.value()),
                    "generate: source/reference resolutions differ");
    GeneratorOutput out;
    const ad::Var f_src = encode_source(ctx, t_src, trainable);
    const ad::Var f_ref = encode_reference(ctx, t_ref, trainable);

    if (config.fam_off) {
        out.repaired = f_ref;
    } else {
        auto [repaired, mask] = fam_repair(ctx, f_ref, trainable);
        out.repaired = repaired;
        out.fam_mask = mask;
    }

    if (config.mtm_off) {
        // Ablation: skip attention, pass the (shaded, optionally masked)
        // repaired feature straight through.
        ad::Var makeup = ad::affine(out.repaired, config.w, 0.0);
        if (config.region_mask_uv != nullptr)
            makeup = apply_region_mask(ctx, makeup, *config.region_mask_uv);
        out.makeup = makeup;
    } else {
        auto [makeup, attention] =
            mtm_transfer(ctx, f_src, out.repaired, config.w, config.region_mask_uv, trainable);
        out.makeup = makeup;
        out.attention = attention;
    }

    out.texture = decode(ctx, f_src, out.makeup, trainable);
    return out;
}

ad::Var TransferNet::discriminate(nn::GraphContext& ctx, const ad::Var& input,
                                  const std::array<nn::Conv2dLayer, 4>& stack,
                                  bool trainable) const {
    const Tensor& v = input.value();
    detail::require(v.rank() == 3 && v.dim(0) == 3, "discriminate: input must be 3 x H x W");
    detail::require(v.dim(1) % 8 == 0 && v.dim(2) % 8 == 0 && v.dim(1) >= 32 && v.dim(2) >= 32,
                    "discriminate: spatial dims must be multiples of 8, at least 32");
    ad::Var x = input;
    for (int i = 0; i < 3; ++i)
        x = ad::leaky_relu(stack[static_cast<std::size_t>(i)](ctx, x, trainable), 0.2);
    return ad::sigmoid(stack[3](ctx, x, trainable));
}

ad::Var TransferNet::discriminate_texture(nn::GraphContext& ctx, const ad::Var& texture,
                                          TextureDomain domain, bool trainable) const {
    return discriminate(ctx, texture, domain == TextureDomain::Source ? d_tex_s_ : d_tex_r_,
                        trainable);
}

ad::Var TransferNet::discriminate_image(nn::GraphContext& ctx, const ad::Var& image,
                                        bool trainable) const {
    return discriminate(ctx, image, d_img_, trainable);
}

namespace {

ad::Var texture_leaf(ad::Tape& tape, const UVTexture& texture, int resolution) {
    detail::require(texture.pixels.rank() == 3 && texture.pixels.dim(0) == resolution &&
                        texture.pixels.dim(1) == resolution && texture.pixels.dim(2) == 3,
                    "transfer: texture must be R x R x 3 at the configured resolution");
    Tensor chw({3, resolution, resolution});
    for (int y = 0; y < resolution; ++y)
        for (int x = 0; x < resolution; ++x)
            for (int c = 0; c < 3; ++c) chw.at(c, y, x) = texture.pixels.at(y, x, c);
    return tape.leaf(std::move(chw), false);
}

} // namespace

InferenceResult TransferNet::run_inference(const UVTexture& source, const UVTexture& reference,
                                           const UVTexture* reference2, double interp_w,
                                           const TransferConfig& config) const {
    ad::Tape tape;
    nn::GraphContext ctx(tape);
    const int res = config_.uv_resolution;
    const ad::Var t_src = texture_leaf(tape, source, res);
    const ad::Var t_ref = texture_leaf(tape, reference, res);

    GeneratorOutput gen;
    if (reference2 == nullptr) {
        gen = generate(ctx, t_src, t_ref, config, /*trainable=*/false);
    } else {
        detail::require(!config.mtm_off,
                        "transfer_interpolated: interpolation needs the attention path");
        const ad::Var t_ref2 = texture_leaf(tape, *reference2, res);
        const ad::Var f_src = encode_source(ctx, t_src, false);
        const ad::Var f_ref1 = encode_reference(ctx, t_ref, false);
        const ad::Var f_ref2 = encode_reference(ctx, t_ref2, false);
        ad::Var hat1 = f_ref1, hat2 = f_ref2;
        if (!config.fam_off) {
            auto repaired1 = fam_repair(ctx, f_ref1, false);
            hat1 = repaired1.first;
            gen.fam_mask = repaired1.second;
            hat2 = fam_repair(ctx, f_ref2, false).first;
        }
        const ad::Var attention = attention_map(ctx, f_src, false);
        ad::Var makeup =
            ad::affine(interpolate_makeup(attention, hat1, hat2, interp_w), config.w, 0.0);
        if (config.region_mask_uv != nullptr)
            makeup = apply_region_mask(ctx, makeup, *config.region_mask_uv);
        gen.attention = attention;
        gen.makeup = makeup;
        gen.texture = decode(ctx, f_src, makeup, false);
    }

    InferenceResult result;
    const Tensor& chw = gen.texture.value();
    result.texture.pixels = Tensor({res, res, 3});
    for (int y = 0; y < res; ++y)
        for (int x = 0; x < res; ++x)
            for (int c = 0; c < 3; ++c) result.texture.pixels.at(y, x, c) = chw.at(c, y, x);
    result.texture.validity = Tensor::ones({res, res});
    if (gen.fam_mask.valid()) {
        const Tensor& m = gen.fam_mask.value();
        result.fam_mask = upsample_nearest(m.reshaped({m.dim(1), m.dim(2)}), res / m.dim(1));
    }
    if (gen.attention.valid()) result.attention = gen.attention.value();
    return result;
}

InferenceResult TransferNet::transfer(const UVTexture& source, const UVTexture& reference,
                                      const TransferConfig& config) const {
    return run_inference(source, reference, nullptr, 1.0, config);
}

InferenceResult TransferNet::transfer_interpolated(const UVTexture& source,
                                                   const UVTexture& reference1,
                                                   const UVTexture& reference2, double interp_w,
                                                   const TransferConfig& config) const {
    detail::require(interp_w >= 0.0 && interp_w <= 1.0,
                    "transfer_interpolated: weight must be in [0,1]");
    return run_inference(source, reference1, &reference2, interp_w, config);
}

Tensor downsample_mask_area(const Tensor& mask, int factor) {
    detail::require(mask.rank() == 2, "downsample_mask_area: mask must be rank 2");
    detail::require(factor >= 1 && mask.dim(0) % factor == 0 && mask.dim(1) % factor == 0,
                    "downsample_mask_area: extents must divide by the factor");
    const int h = mask.dim(0) / factor, w = mask.dim(1) / factor;
    Tensor out({h, w});
    const double inv = 1.0 / (factor * factor);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int di = 0; di < factor; ++di)
                for (int dj = 0; dj < factor; ++dj) acc += mask.at(i * factor + di, j * factor + dj);
            out.at(i, j) = acc * inv;
        }
    return out;
}

Tensor upsample_nearest(const Tensor& t, int factor) {
    detail::require(t.rank() == 2 && factor >= 1, "upsample_nearest: need rank-2 input");
    const int h = t.dim(0), w = t.dim(1);
    Tensor out({h * factor, w * factor});
    for (int i = 0; i < h * factor; ++i)
        for (int j = 0; j < w * factor; ++j) out.at(i, j) = t.at(i / factor, j / factor);
    return out;
}

} // namespace uvmt
