/*
 * uvmt - 3D-aware UV-space makeup transfer in modern C++.
 *
 * File: tests/src/test_tensor_io.cpp
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

#include <cstdint>
#include <random>

#include "uvmt/container.hpp"
#include "uvmt/errors.hpp"
#include "uvmt/image.hpp"
#include "uvmt/rng.hpp"
#include "uvmt/tensor.hpp"

#include "test_util.hpp"

using namespace uvmt;
using testutil::TempDir;

TEST_CASE("tensor construction, fill, and element access") {
    Tensor t({2, 3});
    CHECK(t.rank() == 2);
    CHECK(t.size() == 6);
    CHECK(t.at(1, 2) == 0.0);
    t.fill(2.5);
    CHECK(t.at(0, 0) == 2.5);
    t.at(1, 1) = -1.0;
    CHECK(t.at(1, 1) == -1.0);

    const Tensor u = Tensor::from_data({2, 2}, {1.0, 2.0, 3.0, 4.0});
    CHECK(u.at(1, 0) == 3.0);
    CHECK(u.same_shape(Tensor({2, 2})));
    CHECK_FALSE(u.same_shape(t));
}

TEST_CASE("tensor reshape preserves data and checks element count") {
    const Tensor t = Tensor::from_data({2, 3}, {0, 1, 2, 3, 4, 5});
    const Tensor r = t.reshaped({3, 2});
    CHECK(r.at(2, 1) == 5.0);
    CHECK_THROWS_AS(t.reshaped({4, 2}), ContractError);
}

TEST_CASE("float32 snapping is idempotent and changes non-representable values") {
    Tensor t = Tensor::from_data({2}, {0.1, 1.0});
    t.snap_to_float32();
    const double snapped = t.at(0);
    CHECK(snapped == static_cast<double>(static_cast<float>(0.1)));
    CHECK(snapped != 0.1);
    CHECK(t.at(1) == 1.0);
    Tensor again = t;
    again.snap_to_float32();
    CHECK(testutil::bit_equal(t, again));
}

TEST_CASE("tensor all_finite flags NaN and infinity") {
    Tensor t = Tensor::ones({3});
    CHECK(t.all_finite());
    t.at(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(t.all_finite());
    t.at(1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(t.all_finite());
}

TEST_CASE("seeded rng streams are deterministic and distinct") {
    std::mt19937_64 a = make_rng(42, 7);
    std::mt19937_64 b = make_rng(42, 7);
    std::mt19937_64 c = make_rng(42, 8);
    CHECK(a() == b());
    CHECK(a() == b());
    std::mt19937_64 a2 = make_rng(42, 7);
    CHECK(a2() != c());
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("container round trip reproduces tensors bit-exactly") {
    TempDir dir("container");
    std::mt19937_64 rng = make_rng(3);
    Tensor f = testutil::random_tensor({4, 5, 3}, rng, -2.0, 2.0);
    f.snap_to_float32(); // float32 records are exact only for snapped values
    const std::vector<std::uint8_t> bytes = {0, 1, 255, 128};

    Uvt1Container out;
    out.add_f32("floats", f);
    out.add_i32("ints", {3}, {-1, 0, 2147483647});
    out.add_u8("bytes", {4}, bytes);
    out.save(dir.str("t.uvt1"));

    const Uvt1Container in = Uvt1Container::load(dir.str("t.uvt1"));
    CHECK(in.record_count() == 3);
    CHECK(in.has("floats"));
    CHECK(testutil::bit_equal(in.get_tensor("floats"), f));
    CHECK(in.get_i32("ints") == std::vector<std::int32_t>{-1, 0, 2147483647});
    CHECK(in.get_u8("bytes") == bytes);
}

TEST_CASE("container rejects duplicate names and missing records") {
    Uvt1Container c;
    c.add_f32("x", Tensor::ones({2}));
    CHECK_THROWS_AS(c.add_f32("x", Tensor::ones({2})), IoError);
    CHECK_THROWS_AS(c.get_tensor("absent"), IoError);
}

TEST_CASE("container load rejects a corrupted magic") {
    TempDir dir("container-bad");
    Uvt1Container c;
    c.add_f32("x", Tensor::ones({2}));
    c.save(dir.str("t.uvt1"));
    std::string bytes = testutil::slurp(dir.str("t.uvt1"));
    bytes[0] = 'X';
    std::ofstream(dir.str("bad.uvt1"), std::ios::binary) << bytes;
    CHECK_THROWS_AS(Uvt1Container::load(dir.str("bad.uvt1")), IoError);
}

TEST_CASE("png round trip is exact for 8-bit-representable values") {
    TempDir dir("png");
    Tensor image({5, 7, 3});
    int v = 0;
    for (std::int64_t i = 0; i < image.size(); ++i) image.data()[i] = ((v++ * 37) % 256) / 255.0;
    save_png(dir.str("x.png"), image);
    const Tensor back = load_png(dir.str("x.png"));
    CHECK(back.same_shape(image));
    CHECK(testutil::max_abs_diff(back, image) < 1e-12);
}

TEST_CASE("png save quantizes with round-half-up and clamps the range") {
    TempDir dir("png-q");
    // 0.5/255 rounds up to level 1; out-of-range values clamp to 0 and 255.
    const Tensor image = Tensor::from_data({1, 2, 3}, {0.5 / 255.0, -0.3, 2.0, 0.0, 1.0, 0.2});
    save_png(dir.str("q.png"), image);
    const Tensor back = load_png(dir.str("q.png"));
    CHECK(back.at(0, 0, 0) == doctest::Approx(1.0 / 255.0).epsilon(1e-12));
    CHECK(back.at(0, 0, 1) == 0.0);
    CHECK(back.at(0, 0, 2) == 1.0);
}

TEST_CASE("grayscale png writes a single channel") {
    TempDir dir("png-gray");
    const Tensor mask = Tensor::from_data({2, 2}, {0.0, 1.0, 0.25, 0.75});
    save_png_gray(dir.str("m.png"), mask);
    const Tensor back = load_png(dir.str("m.png"));
    CHECK(back.dim(2) == 3);
    CHECK(back.at(0, 1, 0) == 1.0);
    CHECK(back.at(0, 1, 1) == 1.0); // gray replicated across channels
    CHECK(back.at(1, 0, 0) == doctest::Approx(64.0 / 255.0).epsilon(1e-9));
}
