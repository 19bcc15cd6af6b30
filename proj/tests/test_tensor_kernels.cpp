// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "helpers.hpp"
#include "lipt/kernels.hpp"
#include "lipt/reference.hpp"
#include "lipt/tensor.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

using lipt::ConvWeights;
using lipt::Shape;
using lipt::Tensor;

TEST_CASE("tensor indexing is row-major NCHW") {
    Tensor t({2, 3, 4, 5});
    CHECK(t.size() == 120);
    CHECK(t.index(0, 0, 0, 0) == 0);
    CHECK(t.index(0, 0, 0, 1) == 1);
    CHECK(t.index(0, 0, 1, 0) == 5);
    CHECK(t.index(0, 1, 0, 0) == 20);
    CHECK(t.index(1, 0, 0, 0) == 60);
    t.at(1, 2, 3, 4) = 7.0f;
    CHECK(t.data[119] == 7.0f);
    CHECK(t.plane(1, 2)[19] == 7.0f);
}

TEST_CASE("splitmix64 stream is counter-addressable") {
    // step i of the stream must not depend on evaluation order
    const std::uint64_t a = lipt::splitmix64_at(42, 5);
    const std::uint64_t b = lipt::splitmix64_at(42, 0);
    CHECK(a == lipt::splitmix64_at(42, 5));
    CHECK(b != a);
    CHECK(lipt::splitmix64_at(43, 5) != a);
}

TEST_CASE("rng_normal is deterministic with sane statistics") {
    const Tensor x = lipt::rng_normal(42, {1, 1, 1000, 1000});
    const Tensor y = lipt::rng_normal(42, {1, 1, 1000, 1000});
    CHECK(lipt::bit_equal(x, y));

    double mean = 0.0;
    for (float v : x.data)
        mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (float v : x.data)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    CHECK(mean > -0.01);
    CHECK(mean < 0.01);
    CHECK(var > 0.98);
    CHECK(var < 1.02);
}

TEST_CASE("rng_uniform respects bounds and seed separation") {
    const Tensor x = lipt::rng_uniform(7, {1, 2, 33, 17}, -0.25f, 0.75f);
    for (float v : x.data) {
        CHECK(v >= -0.25f);
        CHECK(v < 0.75f);
    }
    CHECK_FALSE(lipt::bit_equal(x, lipt::rng_uniform(8, {1, 2, 33, 17}, -0.25f, 0.75f)));
}

TEST_CASE("conv2d identity kernel returns input plus bias") {
    const Tensor x = testutil::rand_tensor(1, {2, 3, 6, 7});
    ConvWeights w = testutil::identity_1x1(3);
    w.bias = {0.5f, -1.0f, 0.0f};
    const Tensor y = lipt::conv2d(x, w, 0, 1);
    REQUIRE(y.shape == x.shape);
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 3; ++c)
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 7; ++j)
                    CHECK(y.at(n, c, i, j) == doctest::Approx(x.at(n, c, i, j) + w.bias[c]));
}

TEST_CASE("conv2d matches a hand-computed 2x2 case") {
    // single channel, 3x3 kernel of ones, zero padding 1: output = box sums
    Tensor x({1, 1, 2, 2});
    x.data = {1.0f, 2.0f, 3.0f, 4.0f};
    ConvWeights w;
    w.kernel = Tensor::full({1, 1, 3, 3}, 1.0f);
    w.bias = {0.0f};
    const Tensor y = lipt::conv2d(x, w, 1, 1);
    CHECK(y.data[0] == 10.0f); // all four pixels in every 3x3 support
    CHECK(y.data[1] == 10.0f);
    CHECK(y.data[2] == 10.0f);
    CHECK(y.data[3] == 10.0f);
}

TEST_CASE("conv2d matches the serial reference oracle") {
    const Tensor x = testutil::rand_tensor(11, {1, 4, 8, 8});
    const ConvWeights w = testutil::rand_conv(12, 8, 4, 3);
    const Tensor fast = lipt::conv2d(x, w, 1, 1);
    const Tensor slow = lipt::ref::conv2d(x, w, 1, 1);
    REQUIRE(fast.shape == slow.shape);
    CHECK(lipt::max_abs_diff(fast, slow) <= 1e-5f);

    // assorted padding / kernel / batch combinations
    int case_id = 0;
    for (int k : {1, 3}) {
        for (int pad : {0, (k - 1) / 2, 2}) {
            const Tensor xi = testutil::rand_tensor(100 + case_id, {2, 3, 5, 6});
            const ConvWeights wi = testutil::rand_conv(200 + case_id, 5, 3, k);
            CHECK(lipt::max_abs_diff(lipt::conv2d(xi, wi, pad, 1),
                                     lipt::ref::conv2d(xi, wi, pad, 1)) <= 1e-5f);
            ++case_id;
        }
    }
}

TEST_CASE("conv2d depthwise groups match the reference") {
    const int c = 6;
    const Tensor x = testutil::rand_tensor(21, {1, c, 7, 5});
    ConvWeights w;
    w.kernel = lipt::rng_uniform(22, {c, 1, 3, 3}, -0.5f, 0.5f);
    w.bias = lipt::rng_uniform(23, {1, 1, 1, c}, -0.5f, 0.5f).data;
    w.groups = c;
    CHECK(lipt::max_abs_diff(lipt::conv2d(x, w, 1, c), lipt::ref::conv2d(x, w, 1, c)) <= 1e-5f);
}

TEST_CASE("conv2d is bit-identical across repeated runs") {
    const Tensor x = testutil::rand_tensor(31, {1, 8, 16, 16});
    const ConvWeights w = testutil::rand_conv(32, 8, 8, 3);
    CHECK(lipt::bit_equal(lipt::conv2d(x, w, 1, 1), lipt::conv2d(x, w, 1, 1)));
}

TEST_CASE("conv2d is linear in the input with zero bias") {
    const Tensor x = testutil::rand_tensor(41, {1, 3, 6, 6});
    const Tensor y = testutil::rand_tensor(42, {1, 3, 6, 6});
    ConvWeights w = testutil::rand_conv(43, 4, 3, 3);
    std::fill(w.bias.begin(), w.bias.end(), 0.0f);

    const float alpha = 0.7f, beta = -1.3f;
    Tensor mix({1, 3, 6, 6});
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix.data[i] = alpha * x.data[i] + beta * y.data[i];

    const Tensor lhs = lipt::conv2d(mix, w, 1, 1);
    const Tensor cx = lipt::conv2d(x, w, 1, 1);
    const Tensor cy = lipt::conv2d(y, w, 1, 1);
    float worst = 0.0f;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        const float want = alpha * cx.data[i] + beta * cy.data[i];
        const float scale = std::max(1.0f, std::fabs(want));
        worst = std::max(worst, std::fabs(lhs.data[i] - want) / scale);
    }
    CHECK(worst <= 1e-4f);
}

TEST_CASE("conv2d rejects mismatched channels") {
    const Tensor x = testutil::rand_tensor(51, {1, 3, 4, 4});
    const ConvWeights w = testutil::rand_conv(52, 4, 2, 3);
    CHECK_THROWS_AS((void)lipt::conv2d(x, w, 1, 1), std::invalid_argument);
}

TEST_CASE("relu clamps negatives") {
    Tensor x({1, 1, 1, 3});
    x.data = {-1.0f, 0.0f, 2.0f};
    const Tensor y = lipt::relu(x);
    CHECK(y.data == std::vector<float>{0.0f, 0.0f, 2.0f});
}

TEST_CASE("avg_pool3x3_same equals a fixed 1/9 depthwise conv") {
    const int c = 3;
    const Tensor x = testutil::rand_tensor(61, {2, c, 9, 7});
    ConvWeights w;
    w.kernel = Tensor::full({c, 1, 3, 3}, 1.0f / 9.0f);
    w.bias.assign(c, 0.0f);
    w.groups = c;
    CHECK(lipt::max_abs_diff(lipt::avg_pool3x3_same(x), lipt::ref::conv2d(x, w, 1, c)) <= 1e-6f);
}

TEST_CASE("pixel_shuffle places channel o*r^2 + a*r + b at cell (a, b)") {
    Tensor x({1, 8, 1, 2});
    for (std::size_t i = 0; i < x.size(); ++i)
        x.data[i] = static_cast<float>(i);
    const Tensor y = lipt::pixel_shuffle(x, 2);
    REQUIRE(y.shape == Shape{1, 2, 2, 4});
    for (int o = 0; o < 2; ++o)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 4; ++j) {
                const int a = i % 2, b = j % 2;
                const float want = x.at(0, o * 4 + a * 2 + b, i / 2, j / 2);
                CHECK(y.at(0, o, i, j) == want);
            }
}

TEST_CASE("pixel_shuffle rejects channel counts not divisible by r^2") {
    CHECK_THROWS_AS((void)lipt::pixel_shuffle(Tensor({1, 6, 2, 2}), 2), std::invalid_argument);
}

TEST_CASE("pad_reflect mirrors without duplicating the edge") {
    Tensor x({1, 1, 3, 3});
    for (std::size_t i = 0; i < 9; ++i)
        x.data[i] = static_cast<float>(i);
    const Tensor y = lipt::pad_reflect(x, 2, 2);
    REQUIRE(y.shape == Shape{1, 1, 5, 5});
    // row 0 right part: [0 1 2] -> 2 reflects to 1, 0
    CHECK(y.at(0, 0, 0, 3) == 1.0f);
    CHECK(y.at(0, 0, 0, 4) == 0.0f);
    // col 0 bottom part: [0 3 6] -> 6 reflects to 3, 0
    CHECK(y.at(0, 0, 3, 0) == 3.0f);
    CHECK(y.at(0, 0, 4, 0) == 0.0f);
    // corner: both reflections compose
    CHECK(y.at(0, 0, 3, 3) == 4.0f);
    CHECK(y.at(0, 0, 4, 4) == 0.0f);
    // interior untouched
    CHECK(y.at(0, 0, 2, 2) == 8.0f);
}

TEST_CASE("crop takes the top-left corner") {
    Tensor x({1, 2, 4, 4});
    for (std::size_t i = 0; i < x.size(); ++i)
        x.data[i] = static_cast<float>(i);
    const Tensor y = lipt::crop(x, 2, 3);
    REQUIRE(y.shape == Shape{1, 2, 2, 3});
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(y.at(0, c, i, j) == x.at(0, c, i, j));
}

TEST_CASE("slice/concat channels round-trip") {
    const Tensor x = testutil::rand_tensor(71, {2, 6, 3, 4});
    const Tensor lo = lipt::slice_channels(x, 0, 2);
    const Tensor hi = lipt::slice_channels(x, 2, 6);
    REQUIRE(lo.shape == Shape{2, 2, 3, 4});
    REQUIRE(hi.shape == Shape{2, 4, 3, 4});
    CHECK(lipt::bit_equal(lipt::concat_channels(lo, hi), x));
}

TEST_CASE("add requires matching shapes") {
    const Tensor a = testutil::rand_tensor(81, {1, 2, 3, 3});
    const Tensor b = testutil::rand_tensor(82, {1, 2, 3, 3});
    const Tensor s = lipt::add(a, b);
    for (std::size_t i = 0; i < s.size(); ++i)
        CHECK(s.data[i] == a.data[i] + b.data[i]);
    CHECK_THROWS_AS((void)lipt::add(a, Tensor({1, 2, 3, 4})), std::invalid_argument);
}
