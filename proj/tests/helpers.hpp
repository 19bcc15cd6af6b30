// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/attention.hpp"
#include "lipt/hrm.hpp"
#include "lipt/tensor.hpp"

#include <cstdint>

namespace testutil {

inline lipt::Tensor rand_tensor(std::uint64_t seed, lipt::Shape s, float lo = -1.0f,
                                float hi = 1.0f) {
    return lipt::rng_uniform(seed, s, lo, hi);
}

inline lipt::ConvWeights rand_conv(std::uint64_t seed, int c_out, int c_in, int k,
                                   float scale = 0.5f) {
    lipt::ConvWeights w;
    w.kernel = lipt::rng_uniform(seed, {c_out, c_in, k, k}, -scale, scale);
    const lipt::Tensor b = lipt::rng_uniform(seed ^ 0x9e37u, {1, 1, 1, c_out}, -scale, scale);
    w.bias = b.data;
    w.groups = 1;
    return w;
}

inline lipt::ConvWeights identity_1x1(int c) {
    lipt::ConvWeights w;
    w.kernel = lipt::Tensor({c, c, 1, 1});
    for (int i = 0; i < c; ++i)
        w.kernel.data[static_cast<std::size_t>(i) * c + i] = 1.0f;
    w.bias.assign(static_cast<std::size_t>(c), 0.0f);
    return w;
}

inline lipt::SobelBranch rand_sobel(std::uint64_t seed, int c) {
    lipt::SobelBranch s;
    s.k_x = rand_conv(seed + 1, c, c, 1);
    s.k_y = rand_conv(seed + 2, c, c, 1);
    s.s_x = lipt::rng_uniform(seed + 3, {1, 1, 1, c}, -1.0f, 1.0f).data;
    s.s_y = lipt::rng_uniform(seed + 4, {1, 1, 1, c}, -1.0f, 1.0f).data;
    s.b_dx = lipt::rng_uniform(seed + 5, {1, 1, 1, c}, -0.5f, 0.5f).data;
    s.b_dy = lipt::rng_uniform(seed + 6, {1, 1, 1, c}, -0.5f, 0.5f).data;
    return s;
}

inline lipt::GbWeights rand_gb(std::uint64_t seed, int c, bool extras = true, bool sobel = true) {
    lipt::GbWeights g;
    g.with_extras = extras;
    g.with_sobel = extras && sobel;
    g.conv3 = rand_conv(seed + 10, c, c, 3);
    if (extras) {
        g.conv1 = rand_conv(seed + 11, c, c, 1);
        g.pre3 = rand_conv(seed + 12, c, c, 1);
        g.conv3_after = rand_conv(seed + 13, c, c, 3);
        g.avg_pre = rand_conv(seed + 14, c, c, 1);
        if (sobel)
            g.sobel = rand_sobel(seed + 20, c);
    }
    return g;
}

inline lipt::WindowMSAWeights rand_msa(std::uint64_t seed, int c, int heads) {
    lipt::WindowMSAWeights w;
    w.Wq = rand_conv(seed + 1, c, c, 1);
    w.Wk = rand_conv(seed + 2, c, c, 1);
    w.Wv = rand_conv(seed + 3, c, c, 1);
    w.heads = heads;
    return w;
}

} // namespace testutil
