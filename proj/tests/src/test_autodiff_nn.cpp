/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: tests/src/test_autodiff_nn.cpp
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
#include <functional>
#include <random>

#include "uvmt/autodiff.hpp"
#include "uvmt/container.hpp"
#include "uvmt/errors.hpp"
#include "uvmt/morphable.hpp"
#include "uvmt/nn.hpp"
#include "uvmt/rng.hpp"
#include "uvmt/uv.hpp"

#include "test_util.hpp"

using namespace uvmt;

namespace {

using GraphFn = std::function<ad::Var(ad::Tape&, const ad::Var&)>;

double eval_scalar(const GraphFn& fn, const Tensor& x) {
    ad::Tape tape;
    ad::Var leaf = tape.leaf(x, true);
    const ad::Var root = fn(tape, leaf);
    return root.value().data()[0];
}

/// Central-difference check of d(root)/d(leaf) over every input element.
void gradcheck(const GraphFn& fn, const Tensor& x, double h = 1e-5, double tol = 1e-6) {
    ad::Tape tape;
    ad::Var leaf = tape.leaf(x, true);
    const ad::Var root = fn(tape, leaf);
    REQUIRE(root.value().rank() == 0);
    tape.backward(root);
    const Tensor grad = leaf.grad_or_zero();
    double worst = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) {
        Tensor xp = x, xm = x;
        xp.data()[i] += h;
        xm.data()[i] -= h;
        const double fd = (eval_scalar(fn, xp) - eval_scalar(fn, xm)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - grad.data()[i]) / std::max(1.0, std::abs(fd)));
    }
    CHECK(worst <= tol);
}

/// Scalarizes a tensor-valued node with fixed random weights so every
/// element feeds the root with a distinct coefficient.
ad::Var weighted_sum(ad::Tape& tape, const ad::Var& v, std::uint64_t seed) {
    (void)tape;
    return ad::sum_all(ad::mul_const(v, testutil::random_tensor(v.value().shape(), seed)));
}

/// Inputs kept away from zero so kinked ops (relu, abs) are smooth at the
/// probe points.
Tensor off_zero(const std::vector<int>& shape, std::uint64_t seed) {
    Tensor t = testutil::random_tensor(shape, seed);
    for (std::int64_t i = 0; i < t.size(); ++i)
        t.data()[i] += (t.data()[i] >= 0.0 ? 0.2 : -0.2);
    return t;
}

double snap32(double v) { return static_cast<double>(static_cast<float>(v)); }

} // namespace

TEST_CASE("elementwise op gradients match finite differences") {
    const Tensor a = off_zero({3, 4}, 101);
    const Tensor other = off_zero({3, 4}, 102);

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::add(x, t.leaf(other)), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::sub(x, t.leaf(other)), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::mul(x, t.leaf(other)), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::affine(x, -1.7, 0.3), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::mul_const(x, other), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::relu(x), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::leaky_relu(x, 0.2), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::sigmoid(x), 7);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::abs(x), 7);
    }, a);
}

TEST_CASE("log, clamp, and reduction gradients") {
    Tensor pos = testutil::random_tensor({4, 4}, 103);
    for (std::int64_t i = 0; i < pos.size(); ++i) pos.data()[i] = 0.5 + 0.4 * std::abs(pos.data()[i]);

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::log(x), 9);
    }, pos);
    // probe strictly inside the clamp interval so the derivative is 1
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::clamp(x, 0.01, 2.0), 9);
    }, pos);
    gradcheck([&](ad::Tape&, const ad::Var& x) { return ad::sum_all(x); }, pos);
    gradcheck([&](ad::Tape&, const ad::Var& x) { return ad::mean_all(x); }, pos);

    // clamp kills gradients outside the interval
    ad::Tape tape;
    Tensor v = Tensor::from_data({3}, {-1.0, 0.5, 3.0});
    ad::Var leaf = tape.leaf(v, true);
    ad::Var root = ad::sum_all(ad::clamp(leaf, 0.0, 1.0));
    tape.backward(root);
    const Tensor g = leaf.grad();
    CHECK(g.at(0) == 0.0);
    CHECK(g.at(1) == 1.0);
    CHECK(g.at(2) == 0.0);
}

TEST_CASE("shape ops: reshape, transpose, concat, broadcast, flip, upsample") {
    const Tensor a = off_zero({2, 3, 4}, 104);

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::reshape(x, {4, 6}), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::transpose2d(ad::reshape(x, {6, 4})), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::concat_c(x, t.leaf(off_zero({5, 3, 4}, 105))), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::concat_c(t.leaf(off_zero({5, 3, 4}, 105)), x), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::mul_bcast_c(t.leaf(off_zero({1, 3, 4}, 106)), x), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::mul_bcast_c(ad::sigmoid(ad::reshape(
                                   t.leaf(off_zero({1, 3, 4}, 106), true), {1, 3, 4})), x), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::flip_axis(x, 2), 11);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::upsample_nearest2(x), 11);
    }, a);

    // flip_axis value semantics and odd-extent contract
    ad::Tape tape;
    ad::Var leaf = tape.leaf(a);
    const Tensor flipped = ad::flip_axis(leaf, 2).value();
    for (int c = 0; c < 2; ++c)
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 4; ++x)
                CHECK(flipped.at(c, y, x) == a.at(c, y, 3 - x));
    ad::Var odd = tape.leaf(Tensor({2, 3, 5}));
    CHECK_THROWS_AS(ad::flip_axis(odd, 2), ContractError);

    // upsample replicates each value into a 2x2 block
    ad::Var small = tape.leaf(off_zero({1, 2, 2}, 107));
    const Tensor up = ad::upsample_nearest2(small).value();
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(up.at(0, y, x) == small.value().at(0, y / 2, x / 2));
}

TEST_CASE("matmul agrees with a naive triple loop and its gradients check out") {
    const Tensor a = off_zero({3, 5}, 108);
    const Tensor b = off_zero({5, 2}, 109);

    ad::Tape tape;
    const Tensor got = ad::matmul(tape.leaf(a), tape.leaf(b)).value();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 5; ++k) acc += a.at(i, k) * b.at(k, j);
            CHECK(got.at(i, j) == doctest::Approx(acc).epsilon(1e-12));
        }

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::matmul(x, t.leaf(b)), 13);
    }, a);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::matmul(t.leaf(a), x), 13);
    }, b);
}

TEST_CASE("softmax rows: stochastic rows, shift invariance, gradients") {
    const Tensor logits = testutil::random_tensor({4, 6}, 110);

    ad::Tape tape;
    const Tensor p = ad::softmax_rows(tape.leaf(logits)).value();
    for (int r = 0; r < 4; ++r) {
        double s = 0.0;
        for (int c = 0; c < 6; ++c) {
            CHECK(p.at(r, c) > 0.0);
            s += p.at(r, c);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    // shifting a whole row leaves its softmax unchanged
    Tensor shifted = logits;
    for (int c = 0; c < 6; ++c) shifted.at(1, c) += 123.0;
    const Tensor p2 = ad::softmax_rows(tape.leaf(shifted)).value();
    for (int c = 0; c < 6; ++c) CHECK(p2.at(1, c) == doctest::Approx(p.at(1, c)).epsilon(1e-9));

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::softmax_rows(x), 17);
    }, logits, 1e-5, 1e-5);
}

TEST_CASE("conv2d matches an independent direct convolution") {
    const int cin = 2, cout = 3, h = 6, w = 6, k = 3, stride = 2, pad = 1;
    const Tensor x = off_zero({cin, h, w}, 111);
    const Tensor wt = off_zero({cout, cin, k, k}, 112);
    const Tensor bias = off_zero({cout}, 113);

    ad::Tape tape;
    const Tensor got =
        ad::conv2d(tape.leaf(x), tape.leaf(wt), tape.leaf(bias), stride, pad).value();
    const int oh = (h + 2 * pad - k) / stride + 1;
    const int ow = (w + 2 * pad - k) / stride + 1;
    REQUIRE(got.dim(0) == cout);
    REQUIRE(got.dim(1) == oh);
    REQUIRE(got.dim(2) == ow);

    for (int co = 0; co < cout; ++co)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias.at(co);
                for (int ci = 0; ci < cin; ++ci)
                    for (int ky = 0; ky < k; ++ky)
                        for (int kx = 0; kx < k; ++kx) {
                            const int iy = oy * stride + ky - pad;
                            const int ix = ox * stride + kx - pad;
                            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                            acc += x.at(ci, iy, ix) * wt.at(co, ci, ky, kx);
                        }
                CHECK(got.at(co, oy, ox) == doctest::Approx(acc).epsilon(1e-12));
            }
}

TEST_CASE("conv2d gradients for input, weights, and bias") {
    const Tensor x = off_zero({2, 5, 5}, 114);
    const Tensor wt = off_zero({3, 2, 4, 4}, 115);
    const Tensor bias = off_zero({3}, 116);

    gradcheck([&](ad::Tape& t, const ad::Var& v) {
        return weighted_sum(t, ad::conv2d(v, t.leaf(wt), t.leaf(bias), 2, 1), 19);
    }, x);
    gradcheck([&](ad::Tape& t, const ad::Var& v) {
        return weighted_sum(t, ad::conv2d(t.leaf(x), v, t.leaf(bias), 2, 1), 19);
    }, wt);
    gradcheck([&](ad::Tape& t, const ad::Var& v) {
        return weighted_sum(t, ad::conv2d(t.leaf(x), t.leaf(wt), v, 2, 1), 19);
    }, bias);
}

TEST_CASE("layout permutations invert each other and pass gradients through") {
    const Tensor chw = off_zero({3, 4, 6}, 117);
    ad::Tape tape;
    ad::Var v = tape.leaf(chw);
    const Tensor back = ad::hwc_to_chw(ad::chw_to_hwc(v)).value();
    CHECK(testutil::bit_equal(back, chw));

    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::chw_to_hwc(x), 23);
    }, chw);
    gradcheck([&](ad::Tape& t, const ad::Var& x) {
        return weighted_sum(t, ad::hwc_to_chw(ad::chw_to_hwc(x)), 23);
    }, chw);
}

TEST_CASE("raster_apply forwards like apply_raster_map and back-propagates exactly") {
    const MorphableBasis basis = make_synthetic_basis();
    FaceCoefficients c;
    c.alpha_id.assign(static_cast<std::size_t>(basis.k_id()), 0.0);
    c.alpha_exp.assign(static_cast<std::size_t>(basis.k_exp()), 0.0);
    c.alpha_tex.assign(static_cast<std::size_t>(basis.k_tex()), 0.0);
    c.projection = make_weak_perspective(12.0, 6.0, 0.0, 0.0, 16.0, 16.0, true);
    const FittedFace fitted = make_fitted_face(basis, c);
    const RasterMap map = build_raster_map(fitted, 32, 32, 16);

    const Tensor uv = testutil::random_tensor({16, 16, 3}, 118);
    ad::Tape tape;
    ad::Var leaf = tape.leaf(uv, true);
    ad::Var rendered = ad::raster_apply(leaf, map);
    CHECK(testutil::bit_equal(rendered.value(), apply_raster_map(map, uv)));

    const Tensor weights = testutil::random_tensor({32, 32, 3}, 119);
    ad::Var root = ad::sum_all(ad::mul_const(rendered, weights));
    tape.backward(root);
    // the map is linear, so the adjoint is raster_map_backward of the weights
    CHECK(testutil::max_abs_diff(leaf.grad(), raster_map_backward(map, weights)) <= 1e-12);
}

TEST_CASE("detach stops gradients and reuse accumulates them") {
    ad::Tape tape;
    const Tensor x = off_zero({3}, 120);
    ad::Var leaf = tape.leaf(x, true);

    // y = x * detach(x): only the differentiable factor contributes
    ad::Var y = ad::mul(leaf, ad::detach(leaf));
    tape.backward(ad::sum_all(y));
    for (int i = 0; i < 3; ++i) CHECK(leaf.grad().at(i) == doctest::Approx(x.at(i)).epsilon(1e-12));

    // z = x + x accumulates both paths
    ad::Tape tape2;
    ad::Var leaf2 = tape2.leaf(x, true);
    tape2.backward(ad::sum_all(ad::add(leaf2, leaf2)));
    for (int i = 0; i < 3; ++i) CHECK(leaf2.grad().at(i) == 2.0);
}

TEST_CASE("backward demands a scalar differentiable root on the same tape") {
    ad::Tape tape;
    ad::Var vec = tape.leaf(Tensor({3}), true);
    CHECK_THROWS_AS(tape.backward(vec), ContractError);

    ad::Var constant = tape.leaf(Tensor({}), false);
    CHECK_THROWS_AS(tape.backward(constant), ContractError);

    ad::Tape other;
    ad::Var foreign = other.leaf(Tensor({}), true);
    CHECK_THROWS_AS(tape.backward(foreign), ContractError);
}

TEST_CASE("param store registration, snapping, and duplicate rejection") {
    nn::ParamStore store;
    Tensor init = Tensor::from_data({2}, {0.1, 1.0 / 3.0});
    nn::Param& p = store.add("probe", init);
    // stored values are float32-representable from the start
    CHECK(p.value.at(0) == snap32(0.1));
    CHECK(p.value.at(1) == snap32(1.0 / 3.0));
    CHECK(p.moment1.at(0) == 0.0);
    CHECK(p.moment2.at(1) == 0.0);
    CHECK(store.count() == 1);
    CHECK(store.has("probe"));
    CHECK(!store.has("probe2"));
    CHECK_THROWS_AS(store.add("probe", Tensor({2})), ContractError);
}

TEST_CASE("adam with beta1 = 0 follows the closed-form scalar step") {
    nn::ParamStore store;
    nn::Param& p = store.add("w", Tensor::from_data({}, {0.5}));
    const nn::AdamConfig cfg; // lr 2e-4, beta1 0, beta2 0.9, eps 1e-8

    // independent reimplementation in plain doubles, snapped like the store
    double x = p.value.at(0), m = 0.0, v = 0.0;
    const double g1 = 0.37, g2 = -0.12;
    auto reference_step = [&](double g, int step) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
        const double mh = m / (1.0 - std::pow(cfg.beta1, step));
        const double vh = v / (1.0 - std::pow(cfg.beta2, step));
        x -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        x = snap32(x);
        m = snap32(m);
        v = snap32(v);
    };

    nn::adam_update_one(p, Tensor::from_data({}, {g1}), cfg, 1);
    reference_step(g1, 1);
    CHECK(p.value.at(0) == x);
    CHECK(p.moment1.at(0) == m);
    CHECK(p.moment2.at(0) == v);

    nn::adam_update_one(p, Tensor::from_data({}, {g2}), cfg, 2);
    reference_step(g2, 2);
    CHECK(p.value.at(0) == x);
    CHECK(p.moment1.at(0) == m);
    CHECK(p.moment2.at(0) == v);

    // with beta1 = 0 the first step moves against the sign of the gradient
    // at nearly the full learning rate (second moment cancels |g|)
    nn::Param& q = store.add("w2", Tensor::from_data({}, {0.0}));
    nn::adam_update_one(q, Tensor::from_data({}, {0.37}), cfg, 1);
    CHECK(q.value.at(0) < 0.0);
    CHECK(std::abs(-q.value.at(0) - cfg.lr) / cfg.lr <= 1e-4);
}

TEST_CASE("graph context binds each parameter once and respects trainability") {
    nn::ParamStore store;
    nn::Param& p = store.add("w", testutil::random_tensor({2, 2}, 121));
    nn::Param& frozen = store.add("f", testutil::random_tensor({2, 2}, 122));

    ad::Tape tape;
    nn::GraphContext ctx(tape);
    ad::Var a = ctx.use(p);
    ad::Var b = ctx.use(p); // same leaf, not a new node
    CHECK(a.id() == b.id());
    CHECK(ctx.bound().size() == 1);
    CHECK_THROWS_AS(ctx.use(p, false), ContractError);

    ad::Var fz = ctx.use(frozen, false);
    CHECK(!fz.requires_grad());

    // gradient accumulates across the two uses of the same parameter
    ad::Var y = ad::add(ad::sum_all(a), ad::sum_all(ad::mul(b, b)));
    tape.backward(y);
    const Tensor g = a.grad();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(g.at(i, j) == doctest::Approx(1.0 + 2.0 * p.value.at(i, j)).epsilon(1e-12));
}

TEST_CASE("adam_step skips frozen bindings") {
    nn::ParamStore store;
    nn::Param& live = store.add("live", Tensor::from_data({}, {1.0}));
    nn::Param& frozen = store.add("frozen", Tensor::from_data({}, {1.0}));

    ad::Tape tape;
    nn::GraphContext ctx(tape);
    ad::Var a = ctx.use(live, true);
    ad::Var b = ctx.use(frozen, false);
    tape.backward(ad::sum_all(ad::mul(ad::add(a, ad::detach(b)), ad::add(a, ad::detach(b)))));

    nn::adam_step(ctx.bound(), nn::AdamConfig{}, 1);
    CHECK(live.value.at(0) != 1.0);
    CHECK(frozen.value.at(0) == 1.0);
}

TEST_CASE("he_normal is seeded, shaped, and scaled as documented") {
    std::mt19937_64 rng1 = make_rng(777);
    std::mt19937_64 rng2 = make_rng(777);
    const Tensor a = nn::he_normal({64, 64}, 64, rng1);
    const Tensor b = nn::he_normal({64, 64}, 64, rng2);
    CHECK(testutil::bit_equal(a, b));
    REQUIRE(a.rank() == 2);

    double mean = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) mean += a.data()[i];
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) {
        const double d = a.data()[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(a.size());
    CHECK(std::abs(mean) <= 0.02);
    CHECK(std::sqrt(var) == doctest::Approx(std::sqrt(2.0 / 64.0)).epsilon(0.1));

    std::mt19937_64 rng3 = make_rng(777);
    const Tensor scaled = nn::he_normal({64, 64}, 64, rng3, 0.01);
    CHECK(scaled.at(0, 0) == doctest::Approx(0.01 * a.at(0, 0)).epsilon(1e-6));
}

TEST_CASE("conv layer wraps the conv2d op and registers both tensors") {
    nn::ParamStore store;
    std::mt19937_64 rng = make_rng(778);
    const nn::Conv2dLayer layer = nn::Conv2dLayer::create(store, "enc", 3, 8, 4, 2, 1, rng);
    CHECK(store.has("enc.w"));
    CHECK(store.has("enc.b"));
    REQUIRE(layer.weight != nullptr);
    CHECK(layer.weight->value.dim(0) == 8);
    CHECK(layer.weight->value.dim(1) == 3);
    CHECK(layer.weight->value.dim(2) == 4);
    CHECK(layer.weight->value.dim(3) == 4);

    const Tensor x = testutil::random_tensor({3, 8, 8}, 123);
    ad::Tape tape;
    nn::GraphContext ctx(tape);
    const Tensor via_layer = layer(ctx, tape.leaf(x)).value();
    const Tensor direct = ad::conv2d(tape.leaf(x), tape.leaf(layer.weight->value),
                                     tape.leaf(layer.bias->value), 2, 1)
                              .value();
    CHECK(testutil::bit_equal(via_layer, direct));
    CHECK(via_layer.dim(1) == 4);
    CHECK(via_layer.dim(2) == 4);
}

TEST_CASE("param store container round trip restores values and moments bit-exactly") {
    testutil::TempDir dir("nnstore");
    nn::ParamStore store;
    store.add("a", testutil::random_tensor({3, 3}, 124));
    store.add("b", testutil::random_tensor({5}, 125));
    // push non-zero moments through a real update
    nn::adam_update_one(store.get("a"), testutil::random_tensor({3, 3}, 126), nn::AdamConfig{}, 1);

    Uvt1Container out;
    store.save_into(out, true);
    const std::string path = dir.str("params.uvt1");
    out.save(path);

    Uvt1Container in = Uvt1Container::load(path);
    nn::ParamStore restored;
    restored.add("a", Tensor({3, 3}));
    restored.add("b", Tensor({5}));
    restored.load_from(in);

    CHECK(testutil::bit_equal(restored.get("a").value, store.get("a").value));
    CHECK(testutil::bit_equal(restored.get("a").moment1, store.get("a").moment1));
    CHECK(testutil::bit_equal(restored.get("a").moment2, store.get("a").moment2));
    CHECK(testutil::bit_equal(restored.get("b").value, store.get("b").value));
}
