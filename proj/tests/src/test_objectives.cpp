/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: tests/src/test_objectives.cpp
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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "uvmt/errors.hpp"
#include "uvmt/histogram.hpp"
#include "uvmt/objectives.hpp"
#include "uvmt/rng.hpp"

#include "test_util.hpp"

using namespace uvmt;

namespace {

Tensor uniform_pixels(int n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    return testutil::random_tensor({n, 3}, seed, lo, hi);
}

/// Mass CDF over quantization levels.
std::vector<double> level_cdf(const Tensor& pixels, int channel, int bins) {
    std::vector<double> h = channel_histogram(pixels, channel, bins);
    for (std::size_t i = 1; i < h.size(); ++i) h[i] += h[i - 1];
    return h;
}

/// One-dimensional earth mover distance in level units: the area between
/// the two CDFs.
double emd_levels(const Tensor& a, const Tensor& b, int channel, int bins) {
    const std::vector<double> ca = level_cdf(a, channel, bins);
    const std::vector<double> cb = level_cdf(b, channel, bins);
    double s = 0.0;
    for (int l = 0; l < bins; ++l) s += std::abs(ca[static_cast<std::size_t>(l)] -
                                                 cb[static_cast<std::size_t>(l)]);
    return s;
}

double scalar(const ad::Var& v) { return v.value().data()[0]; }

std::map<std::string, Tensor> random_disjoint_masks(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_int_distribution<int> owner(0, 5);
    std::map<std::string, Tensor> masks;
    masks["lips"] = Tensor({h, w});
    masks["eye"] = Tensor({h, w});
    masks["face"] = Tensor({h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            switch (owner(rng)) {
                case 0: masks["lips"].at(y, x) = 1.0; break;
                case 1: masks["eye"].at(y, x) = 1.0; break;
                case 2:
                case 3: masks["face"].at(y, x) = 1.0; break;
                default: break; // unmasked background
            }
        }
    return masks;
}

} // namespace

TEST_CASE("histogram matching a region to itself is the identity within one level") {
    const HistogramSpec spec;
    const Tensor pixels = uniform_pixels(400, 300);
    const Tensor matched = histogram_match(pixels, pixels, spec);
    double worst = 0.0;
    for (std::int64_t i = 0; i < pixels.size(); ++i)
        worst = std::max(worst, std::abs(matched.data()[i] - pixels.data()[i]));
    CHECK(worst <= 1.0 / spec.bins);
}

TEST_CASE("histogram matching is idempotent within one level") {
    const HistogramSpec spec;
    const Tensor src = uniform_pixels(500, 301, 0.1, 0.9);
    const Tensor ref = uniform_pixels(700, 302, 0.3, 1.0);
    const Tensor once = histogram_match(src, ref, spec);
    const Tensor twice = histogram_match(once, ref, spec);
    double worst = 0.0;
    for (std::int64_t i = 0; i < once.size(); ++i)
        worst = std::max(worst, std::abs(twice.data()[i] - once.data()[i]));
    CHECK(worst <= 1.0 / spec.bins);
}

TEST_CASE("a constant source matches to the reference median level") {
    const HistogramSpec spec;
    const Tensor src = Tensor::full({50, 3}, 0.2);
    const Tensor ref = uniform_pixels(201, 303, 0.4, 0.9); // odd count: unique median

    const Tensor matched = histogram_match(src, ref, spec);
    for (int c = 0; c < 3; ++c) {
        // direct CDF oracle: smallest level holding half the reference mass
        const std::vector<double> cdf = level_cdf(ref, c, spec.bins);
        int median_level = 0;
        while (median_level < spec.bins - 1 &&
               cdf[static_cast<std::size_t>(median_level)] < 0.5)
            ++median_level;
        const double expected = (median_level + 0.5) / spec.bins;
        for (int i = 0; i < 50; ++i)
            CHECK(matched.at(i, c) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("matched output transports at most two levels of histogram mass") {
    const HistogramSpec spec;
    std::mt19937_64 rng = make_rng(304);
    std::uniform_real_distribution<double> start(0.0, 0.6);
    std::uniform_real_distribution<double> width(0.3, 0.4);
    for (int pair = 0; pair < 20; ++pair) {
        const double a0 = start(rng), a1 = std::min(1.0, a0 + width(rng));
        const double b0 = start(rng), b1 = std::min(1.0, b0 + width(rng));
        const Tensor src = testutil::random_tensor({2500, 3}, rng, a0, a1);
        const Tensor ref = testutil::random_tensor({2500, 3}, rng, b0, b1);
        const Tensor matched = histogram_match(src, ref, spec);
        for (int c = 0; c < 3; ++c) CHECK(emd_levels(matched, ref, c, spec.bins) <= 2.0);
    }
}

TEST_CASE("histogram matching rejects empty regions and silly bin counts") {
    CHECK_THROWS_AS(histogram_match(Tensor({0, 3}), uniform_pixels(10, 305)), ContractError);
    CHECK_THROWS_AS(histogram_match(uniform_pixels(10, 305), Tensor({0, 3})), ContractError);
    HistogramSpec bad;
    bad.bins = 1;
    CHECK_THROWS_AS(histogram_match(uniform_pixels(4, 306), uniform_pixels(4, 307), bad),
                    ContractError);
}

TEST_CASE("gather and scatter are inverse on masked pixels") {
    const Tensor image = testutil::random_tensor({6, 5, 3}, 308);
    Tensor mask({6, 5});
    mask.at(0, 0) = 1.0;
    mask.at(3, 2) = 1.0;
    mask.at(5, 4) = 1.0;
    const Tensor pixels = gather_masked(image, mask);
    REQUIRE(pixels.dim(0) == 3);
    CHECK(pixels.at(0, 0) == image.at(0, 0, 0));
    CHECK(pixels.at(1, 2) == image.at(3, 2, 2));
    const Tensor back = scatter_masked(image, mask, pixels);
    CHECK(testutil::bit_equal(back, image));
}

TEST_CASE("makeup loss on a hand-computed two-region example") {
    // 4 x 4 image, bins = 2, identical channels. Lips pixels sit at 0.2 and
    // must match a reference whose lips sit in the upper bin, landing on its
    // center 0.75: squared error 0.3025 per value. Eye pixels 0.6 and 1.0
    // match a lower-bin reference landing on 0.25: mean squared error
    // (0.1225 + 0.5625) / 2 = 0.3425.
    Tensor image({4, 4, 3});
    Tensor reference({4, 4, 3});
    std::map<std::string, Tensor> masks;
    masks["lips"] = Tensor({4, 4});
    masks["eye"] = Tensor({4, 4});
    masks["face"] = Tensor({4, 4}); // empty: skipped

    auto set_all = [](Tensor& t, int y, int x, double v) {
        for (int c = 0; c < 3; ++c) t.at(y, x, c) = v;
    };
    masks["lips"].at(0, 0) = 1.0;
    masks["lips"].at(0, 1) = 1.0;
    set_all(image, 0, 0, 0.2);
    set_all(image, 0, 1, 0.2);
    set_all(reference, 0, 0, 0.8);
    set_all(reference, 0, 1, 0.9);

    masks["eye"].at(2, 2) = 1.0;
    masks["eye"].at(2, 3) = 1.0;
    set_all(image, 2, 2, 0.6);
    set_all(image, 2, 3, 1.0);
    set_all(reference, 2, 2, 0.1);
    set_all(reference, 2, 3, 0.3);

    HistogramSpec spec;
    spec.bins = 2;
    LossWeights weights; // lambda1 = lambda2 = 1

    ad::Tape tape;
    std::vector<std::string> skipped;
    const ad::Var loss =
        makeup_loss(tape.leaf(image, true), reference, masks, weights, spec, &skipped);
    CHECK(std::abs(scalar(loss) - (0.3025 + 0.3425)) <= 1e-6);
    REQUIRE(skipped.size() == 1);
    CHECK(skipped[0] == "face");
}

TEST_CASE("makeup loss vanishes when weights vanish and when already matched") {
    const int n = 16;
    const Tensor reference = testutil::random_tensor({n, n, 3}, 309);
    const auto masks = random_disjoint_masks(n, n, 310);
    Tensor image = testutil::random_tensor({n, n, 3}, 311);

    LossWeights zeroed;
    zeroed.lambda1 = zeroed.lambda2 = zeroed.lambda3 = 0.0;
    ad::Tape tape;
    CHECK(scalar(makeup_loss(tape.leaf(image), reference, masks, zeroed)) == 0.0);

    // pre-match each region, then the loss is quantization noise only
    for (const char* name : {"lips", "eye", "face"}) {
        const Tensor src = gather_masked(image, masks.at(name));
        const Tensor ref = gather_masked(reference, masks.at(name));
        image = scatter_masked(image, masks.at(name), histogram_match(src, ref));
    }
    ad::Tape tape2;
    CHECK(scalar(makeup_loss(tape2.leaf(image), reference, masks, LossWeights{})) <= 1e-3);
}

TEST_CASE("makeup loss throws on a degenerate render with all regions empty") {
    std::map<std::string, Tensor> empty;
    empty["lips"] = Tensor({4, 4});
    empty["eye"] = Tensor({4, 4});
    empty["face"] = Tensor({4, 4});
    ad::Tape tape;
    const ad::Var image = tape.leaf(Tensor({4, 4, 3}));
    CHECK_THROWS_AS(makeup_loss(image, Tensor({4, 4, 3}), empty, LossWeights{}), TrainingError);
}

TEST_CASE("makeup loss gradient matches finite differences with the target fixed") {
    const int n = 16;
    const Tensor reference = testutil::random_tensor({n, n, 3}, 312);
    const auto masks = random_disjoint_masks(n, n, 313);
    const Tensor image = testutil::random_tensor({n, n, 3}, 314);
    const LossWeights weights;
    const HistogramSpec spec;

    ad::Tape tape;
    ad::Var leaf = tape.leaf(image, true);
    const ad::Var loss = makeup_loss(leaf, reference, masks, weights, spec);
    tape.backward(loss);
    const Tensor grad = leaf.grad();

    // the same objective with its histogram targets frozen at `image`
    struct Region {
        const Tensor* mask;
        Tensor target;
        double lambda;
        int count;
    };
    std::vector<Region> regions;
    const std::pair<const char*, double> items[] = {
        {"lips", weights.lambda1}, {"eye", weights.lambda2}, {"face", weights.lambda3}};
    for (const auto& [name, lambda] : items) {
        const Tensor& mask = masks.at(name);
        int count = 0;
        for (std::int64_t i = 0; i < mask.size(); ++i)
            if (mask.data()[i] != 0.0) ++count;
        REQUIRE(count > 0);
        const Tensor matched =
            histogram_match(gather_masked(image, mask), gather_masked(reference, mask), spec);
        regions.push_back({&mask, scatter_masked(image, mask, matched), lambda, count});
    }
    auto fixed_loss = [&](const Tensor& img) {
        double total = 0.0;
        for (const Region& r : regions) {
            double sq = 0.0;
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    if (r.mask->at(y, x) == 0.0) continue;
                    for (int c = 0; c < 3; ++c) {
                        const double d = img.at(y, x, c) - r.target.at(y, x, c);
                        sq += d * d;
                    }
                }
            total += r.lambda * sq / (3.0 * r.count);
        }
        return total;
    };
    CHECK(std::abs(fixed_loss(image) - scalar(loss)) <= 1e-9);

    std::mt19937_64 rng = make_rng(315);
    std::uniform_int_distribution<int> pick(0, n - 1), pick_c(0, 2);
    const double h = 1e-3;
    int probed = 0;
    while (probed < 10) {
        const int y = pick(rng), x = pick(rng), c = pick_c(rng);
        if (masks.at("lips").at(y, x) == 0.0 && masks.at("eye").at(y, x) == 0.0 &&
            masks.at("face").at(y, x) == 0.0)
            continue;
        Tensor up = image, down = image;
        up.at(y, x, c) += h;
        down.at(y, x, c) -= h;
        const double fd = (fixed_loss(up) - fixed_loss(down)) / (2.0 * h);
        CHECK(std::abs(fd - grad.at(y, x, c)) / std::max(1e-9, std::abs(fd)) <= 2e-3);
        ++probed;
    }
}

TEST_CASE("perceptual loss: zero at equality, symmetric, monotone along a path") {
    const PerceptualExtractor extractor;
    const Tensor a = testutil::random_tensor({3, 32, 32}, 316);
    const Tensor b = testutil::random_tensor({3, 32, 32}, 317);

    ad::Tape tape;
    nn::GraphContext ctx(tape);
    const ad::Var va = tape.leaf(a);
    const ad::Var vb = tape.leaf(b);

    const Tensor feat = extractor.features(ctx, va).value();
    CHECK(feat.dim(0) == 512);
    CHECK(feat.dim(1) == 4);
    CHECK(feat.dim(2) == 4);

    CHECK(scalar(perceptual_loss(ctx, extractor, va, va)) == 0.0);
    const double ab = scalar(perceptual_loss(ctx, extractor, va, vb));
    const double ba = scalar(perceptual_loss(ctx, extractor, vb, va));
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab > 0.0);

    double prev = 0.0;
    for (int k = 1; k <= 5; ++k) {
        Tensor mix = a;
        const double t = k / 5.0;
        for (std::int64_t i = 0; i < mix.size(); ++i)
            mix.data()[i] = (1.0 - t) * a.data()[i] + t * b.data()[i];
        const double d = scalar(perceptual_loss(ctx, extractor, va, tape.leaf(mix)));
        CHECK(d > prev);
        prev = d;
    }

    // the extractor is frozen: binding it never exposes trainable leaves
    for (const auto& [param, var] : ctx.bound()) {
        (void)param;
        CHECK(!var.requires_grad());
    }
}

TEST_CASE("cycle loss: identity, constant-generator closed form, and formula") {
    const Tensor t_src = testutil::random_tensor({3, 16, 16}, 318);
    const Tensor t_ref = testutil::random_tensor({3, 16, 16}, 319);

    ad::Tape tape;
    const ad::Var src = tape.leaf(t_src);
    const ad::Var ref = tape.leaf(t_ref);
    CHECK(scalar(cycle_loss(src, src, ref, ref)) == 0.0);

    // constant generator output c
    const Tensor c = Tensor::full({3, 16, 16}, 0.3);
    double expect = 0.0;
    for (std::int64_t i = 0; i < c.size(); ++i) expect += std::abs(c.data()[i] - t_src.data()[i]);
    expect /= static_cast<double>(c.size());
    double expect_ref = 0.0;
    for (std::int64_t i = 0; i < c.size(); ++i)
        expect_ref += std::abs(c.data()[i] - t_ref.data()[i]);
    expect_ref /= static_cast<double>(c.size());
    const ad::Var cv = tape.leaf(c);
    CHECK(scalar(cycle_loss(cv, src, cv, ref)) ==
          doctest::Approx(expect + expect_ref).epsilon(1e-12));

    // random reconstructions against a direct recomputation
    const Tensor r1 = testutil::random_tensor({3, 16, 16}, 320);
    const Tensor r2 = testutil::random_tensor({3, 16, 16}, 321);
    double direct = 0.0;
    for (std::int64_t i = 0; i < r1.size(); ++i) direct += std::abs(r1.data()[i] - t_src.data()[i]);
    direct /= static_cast<double>(r1.size());
    double direct2 = 0.0;
    for (std::int64_t i = 0; i < r2.size(); ++i)
        direct2 += std::abs(r2.data()[i] - t_ref.data()[i]);
    direct2 /= static_cast<double>(r2.size());
    CHECK(std::abs(scalar(cycle_loss(tape.leaf(r1), src, tape.leaf(r2), ref)) -
                   (direct + direct2)) <= 1e-7);
}

TEST_CASE("adversarial terms at the symmetric point and against a re-implementation") {
    ad::Tape tape;
    const ad::Var half = tape.leaf(Tensor::full({1, 4, 4}, 0.5));
    CHECK(std::abs(scalar(adv_real_term(half)) - std::log(2.0)) <= 1e-9);
    CHECK(std::abs(scalar(adv_fake_term(half)) - std::log(2.0)) <= 1e-9);
    CHECK(std::abs(scalar(adv_discriminator_loss(half, half, half, half)) - 4.0 * std::log(2.0)) <=
          1e-9);
    CHECK(std::abs(scalar(adv_generator_loss(half, half)) - 2.0 * std::log(2.0)) <= 1e-9);

    // a perfect discriminator drives its own loss to ~0 and the generator's up
    const ad::Var real = tape.leaf(Tensor::full({1, 4, 4}, 1.0));
    const ad::Var fake = tape.leaf(Tensor::full({1, 4, 4}, 0.0));
    CHECK(scalar(adv_discriminator_loss(real, real, fake, fake)) <= 1e-5);
    CHECK(std::abs(scalar(adv_generator_loss(fake, fake)) - (-2.0 * std::log(kScoreEps))) <= 1e-6);

    // random scores against an independent clamped-log implementation
    const Tensor scores_a = testutil::random_tensor({1, 5, 5}, 322);
    const Tensor scores_b = testutil::random_tensor({1, 5, 5}, 323);
    auto mean_log = [](const Tensor& s, bool one_minus) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < s.size(); ++i) {
            const double v = std::min(1.0 - kScoreEps, std::max(kScoreEps, s.data()[i]));
            acc += std::log(one_minus ? 1.0 - v : v);
        }
        return -acc / static_cast<double>(s.size());
    };
    CHECK(std::abs(scalar(adv_real_term(tape.leaf(scores_a))) - mean_log(scores_a, false)) <= 1e-7);
    CHECK(std::abs(scalar(adv_fake_term(tape.leaf(scores_b))) - mean_log(scores_b, true)) <= 1e-7);
    CHECK(std::abs(scalar(adv_discriminator_loss(tape.leaf(scores_a), tape.leaf(scores_b),
                                                 tape.leaf(scores_b), tape.leaf(scores_a))) -
                   (mean_log(scores_a, false) + mean_log(scores_b, false) +
                    mean_log(scores_b, true) + mean_log(scores_a, true))) <= 1e-7);
}

TEST_CASE("total loss composition reproduces the canonical arithmetic") {
    LossComponents unit;
    unit.g_tex = unit.g_img = unit.d_tex = unit.d_img = 1.0;
    unit.makeup = unit.cycle = unit.perceptual = 1.0;
    const LossWeights defaults;
    const TotalLoss t = total_loss(unit, defaults);
    CHECK(std::abs(t.generator - 13.005) <= 1e-9);
    CHECK(std::abs(t.discriminator - 2.0) <= 1e-9);

    LossWeights zero;
    zero.lambda1 = zero.lambda2 = zero.lambda3 = 0.0;
    zero.lambda_a = zero.lambda_m = zero.lambda_c = zero.lambda_p = 0.0;
    const TotalLoss z = total_loss(unit, zero);
    CHECK(z.generator == 0.0);
    CHECK(z.discriminator == 0.0);

    // graph-level composition agrees with the plain arithmetic
    ad::Tape tape;
    auto leaf_scalar = [&](double v) { return tape.leaf(Tensor::from_data({}, {v})); };
    LossComponents random;
    random.g_tex = 0.37;
    random.g_img = 1.21;
    random.d_tex = 0.55;
    random.d_img = 0.81;
    random.makeup = 2.13;
    random.cycle = 0.041;
    random.perceptual = 7.7;
    const double expect_g = defaults.lambda_a * (random.g_tex + random.g_img) +
                            defaults.lambda_m * random.makeup + defaults.lambda_c * random.cycle +
                            defaults.lambda_p * random.perceptual;
    const double expect_d = defaults.lambda_a * (random.d_tex + random.d_img);
    CHECK(std::abs(total_loss(random, defaults).generator - expect_g) <= 1e-9);
    CHECK(std::abs(total_loss(random, defaults).discriminator - expect_d) <= 1e-9);
    CHECK(std::abs(scalar(compose_generator_loss(
                       leaf_scalar(random.g_tex), leaf_scalar(random.g_img),
                       leaf_scalar(random.makeup), leaf_scalar(random.cycle),
                       leaf_scalar(random.perceptual), defaults)) -
                   expect_g) <= 1e-9);
    CHECK(std::abs(scalar(compose_discriminator_loss(leaf_scalar(random.d_tex),
                                                     leaf_scalar(random.d_img), defaults)) -
                   expect_d) <= 1e-9);

    // linearity in lambda_c: doubling it adds exactly one more cycle share
    LossWeights doubled = defaults;
    doubled.lambda_c = 2.0 * defaults.lambda_c;
    CHECK(std::abs((total_loss(random, doubled).generator -
                    total_loss(random, defaults).generator) -
                   defaults.lambda_c * random.cycle) <= 1e-12);

    LossWeights negative;
    negative.lambda_c = -1.0;
    CHECK_THROWS_AS(validate_loss_weights(negative), ContractError);
}

TEST_CASE("l1 and mse helper losses are plain elementwise means") {
    const Tensor a = testutil::random_tensor({2, 3, 4}, 324);
    const Tensor b = testutil::random_tensor({2, 3, 4}, 325);
    double l1 = 0.0, sq = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        l1 += std::abs(a.data()[i] - b.data()[i]);
        const double d = a.data()[i] - b.data()[i];
        sq += d * d;
    }
    l1 /= static_cast<double>(a.size());
    sq /= static_cast<double>(a.size());

    ad::Tape tape;
    CHECK(std::abs(scalar(l1_loss(tape.leaf(a), tape.leaf(b))) - l1) <= 1e-12);
    CHECK(std::abs(scalar(mse_loss(tape.leaf(a), tape.leaf(b))) - sq) <= 1e-12);
}
