// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace lipt {

struct Shape {
    int n = 0, c = 0, h = 0, w = 0;

    std::size_t elems() const {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

// Dense NCHW f32 tensor, row-major, index order (n, c, h, w).
struct Tensor {
    Shape shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(Shape s) : shape(s), data(s.elems(), 0.0f) {}

    static Tensor full(Shape s, float v) {
        Tensor t(s);
        std::fill(t.data.begin(), t.data.end(), v);
        return t;
    }

    std::size_t size() const { return data.size(); }

    std::size_t index(int n, int c, int y, int x) const {
        return ((static_cast<std::size_t>(n) * shape.c + c) * shape.h + y) * shape.w + x;
    }
    float& at(int n, int c, int y, int x) { return data[index(n, c, y, x)]; }
    float at(int n, int c, int y, int x) const { return data[index(n, c, y, x)]; }

    // pointer to the (n, c) plane
    float* plane(int n, int c) {
        return data.data() + (static_cast<std::size_t>(n) * shape.c + c) * shape.h * shape.w;
    }
    const float* plane(int n, int c) const {
        return data.data() + (static_cast<std::size_t>(n) * shape.c + c) * shape.h * shape.w;
    }
};

// Convolution parameters. kernel is (c_out, c_in, k, k); depthwise kernels use
// c_in = 1 with groups = c_out.
struct ConvWeights {
    Tensor kernel;
    std::vector<float> bias;
    int groups = 1;

    int c_out() const { return kernel.shape.n; }
    int c_in() const { return kernel.shape.c; }
    int k() const { return kernel.shape.h; }
};

bool all_finite(const Tensor& t);
float max_abs_diff(const Tensor& a, const Tensor& b);
bool bit_equal(const Tensor& a, const Tensor& b);

// SplitMix64 output for step `i` of the stream seeded with `seed`.
// Counter-based so fills can run in parallel and stay reproducible.
std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i);

// Standard normal samples (Box-Muller over SplitMix64). Same (seed, shape)
// gives the same tensor on every platform and thread count.
Tensor rng_normal(std::uint64_t seed, Shape shape);
Tensor rng_uniform(std::uint64_t seed, Shape shape, float lo, float hi);

} // namespace lipt
