// SPDX-License-Identifier: Apache-2.0
#include "lipt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#ifndef M_PI
#define M_PI 3.14159265358979323846
#endif

namespace lipt {

std::string Shape::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

bool all_finite(const Tensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v))
            return false;
    return true;
}

float max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!(a.shape == b.shape))
        return std::numeric_limits<float>::infinity();
    float m = 0.0f;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.shape == b.shape &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t i) {
    std::uint64_t z = seed + (i + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

static double unit_open(std::uint64_t bits) {
    // (0, 1]: Box-Muller needs log of a nonzero value
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

static double unit_half_open(std::uint64_t bits) {
    // [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Tensor rng_normal(std::uint64_t seed, Shape shape) {
    Tensor t(shape);
    const std::int64_t total = static_cast<std::int64_t>(t.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        const double u1 = unit_open(splitmix64_at(seed, 2 * static_cast<std::uint64_t>(i)));
        const double u2 = unit_half_open(splitmix64_at(seed, 2 * static_cast<std::uint64_t>(i) + 1));
        const double r = std::sqrt(-2.0 * std::log(u1));
        t.data[i] = static_cast<float>(r * std::cos(2.0 * M_PI * u2));
    }
    return t;
}

Tensor rng_uniform(std::uint64_t seed, Shape shape, float lo, float hi) {
    Tensor t(shape);
    const std::int64_t total = static_cast<std::int64_t>(t.size());
    const double span = static_cast<double>(hi) - static_cast<double>(lo);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) {
        const double u = unit_half_open(splitmix64_at(seed, static_cast<std::uint64_t>(i)));
        t.data[i] = static_cast<float>(lo + u * span);
    }
    return t;
}

} // namespace lipt
