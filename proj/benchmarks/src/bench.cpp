/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: benchmarks/src/bench.cpp
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

/// Microbenchmarks for the pipeline's hot paths: rasterization, UV
/// extraction, histogram matching, the generator forward pass, and one full
/// optimizer step. Shared fixtures are built once per process.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "uvmt/config.hpp"
#include "uvmt/dataset.hpp"
#include "uvmt/histogram.hpp"
#include "uvmt/morphable.hpp"
#include "uvmt/rng.hpp"
#include "uvmt/tensor.hpp"
#include "uvmt/trainer.hpp"
#include "uvmt/transfer_net.hpp"
#include "uvmt/uv.hpp"

namespace {

using namespace uvmt;

const MorphableBasis& basis() {
    static const MorphableBasis b = make_synthetic_basis();
    return b;
}

FaceCoefficients frontal(double scale, double center, double yaw = 0.0) {
    FaceCoefficients c;
    c.alpha_id.assign(static_cast<std::size_t>(basis().k_id()), 0.0);
    c.alpha_exp.assign(static_cast<std::size_t>(basis().k_exp()), 0.0);
    c.alpha_tex.assign(static_cast<std::size_t>(basis().k_tex()), 0.0);
    c.projection = make_weak_perspective(scale, yaw, 0.0, 0.0, center, center, true);
    return c;
}

UVTexture random_texture(int resolution, std::uint64_t seed) {
    UVTexture t;
    t.pixels = Tensor({resolution, resolution, 3});
    t.validity = Tensor::ones({resolution, resolution});
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (std::int64_t i = 0; i < t.pixels.size(); ++i) t.pixels.data()[i] = dist(rng);
    return t;
}

void BM_Rasterize(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const FittedFace fitted = make_fitted_face(basis(), frontal(0.75 * res, res));
    const UVTexture tex = random_texture(res, 1);
    for (auto _ : state) {
        const RenderedImage img = rasterize(fitted, tex, 2 * res, 2 * res);
        benchmark::DoNotOptimize(img.pixels.data());
    }
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128);

void BM_BuildRasterMap(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const FittedFace fitted = make_fitted_face(basis(), frontal(0.75 * res, res));
    for (auto _ : state) {
        const RasterMap map = build_raster_map(fitted, 2 * res, 2 * res, res);
        benchmark::DoNotOptimize(&map);
    }
}
BENCHMARK(BM_BuildRasterMap)->Arg(64)->Arg(128);

void BM_ApplyRasterMap(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const FittedFace fitted = make_fitted_face(basis(), frontal(0.75 * res, res));
    const RasterMap map = build_raster_map(fitted, 2 * res, 2 * res, res);
    const UVTexture tex = random_texture(res, 2);
    for (auto _ : state) {
        const Tensor image = apply_raster_map(map, tex.pixels);
        benchmark::DoNotOptimize(image.data());
    }
}
BENCHMARK(BM_ApplyRasterMap)->Arg(64)->Arg(128);

void BM_ExtractTexture(benchmark::State& state) {
    const int res = static_cast<int>(state.range(0));
    const FittedFace fitted = make_fitted_face(basis(), frontal(0.75 * res, res, 15.0));
    const RenderedImage img = rasterize(fitted, random_texture(res, 3), 2 * res, 2 * res);
    for (auto _ : state) {
        const UVTexture back = extract_uv_texture(img.pixels, fitted, res);
        benchmark::DoNotOptimize(back.pixels.data());
    }
}
BENCHMARK(BM_ExtractTexture)->Arg(64)->Arg(128);

void BM_HistogramMatch(benchmark::State& state) {
    std::mt19937_64 rng = make_rng(4);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Tensor source({static_cast<int>(state.range(0)), 3});
    Tensor reference({static_cast<int>(state.range(0)), 3});
    for (std::int64_t i = 0; i < source.size(); ++i) source.data()[i] = dist(rng);
    for (std::int64_t i = 0; i < reference.size(); ++i) reference.data()[i] = dist(rng);
    for (auto _ : state) {
        const Tensor matched = histogram_match(source, reference);
        benchmark::DoNotOptimize(matched.data());
    }
}
BENCHMARK(BM_HistogramMatch)->Arg(1000)->Arg(10000);

NetConfig bench_net(int uv) {
    NetConfig cfg;
    cfg.uv_resolution = uv;
    cfg.feature_channels = 16;
    cfg.residual_blocks = 2;
    cfg.disc_channels = 8;
    return cfg;
}

void BM_GeneratorForward(benchmark::State& state) {
    const int uv = static_cast<int>(state.range(0));
    const TransferNet net(bench_net(uv), 1); // setup, outside the timed loop
    const UVTexture src = random_texture(uv, 5);
    const UVTexture ref = random_texture(uv, 6);
    const TransferConfig tc;
    for (auto _ : state) {
        const InferenceResult out = net.transfer(src, ref, tc);
        benchmark::DoNotOptimize(out.texture.pixels.data());
    }
}
BENCHMARK(BM_GeneratorForward)->Arg(32)->Arg(64);

void BM_TrainerStep(benchmark::State& state) {
    TrainConfig config;
    config.net = bench_net(static_cast<int>(state.range(0)));
    config.data.n_makeup = 8;
    config.data.n_plain = 8;
    config.steps = 1 << 30; // never reached; steps are driven manually
    config.seed = 9;
    config.out_dir = "bench-run";
    Trainer trainer(config);
    for (auto _ : state) {
        const StepRecord record = trainer.step_once();
        benchmark::DoNotOptimize(record.totals.generator);
    }
}
BENCHMARK(BM_TrainerStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
