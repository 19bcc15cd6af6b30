// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/kernels.hpp"
#include "lipt/mask.hpp"
#include "lipt/tensor.hpp"
#include "lipt/windowing.hpp"

namespace lipt {

// Q/K/V projections of one windowed attention path. 1x1 convs, c -> c, with
// bias; the output projection lives outside as the shared post-concat 1x1.
struct WindowMSAWeights {
    ConvWeights Wq, Wk, Wv;
    int heads = 1;
};

// Full NVSM-SA parameter set: two attention paths over complementary channel
// halves, their sampling masks, and the merge projection.
struct NVSMWeights {
    WindowMSAWeights slwa; // first  C/2 channels, sparse large-window mask
    WindowMSAWeights dlwa; // second C/2 channels, dense local-window mask
    ConvWeights proj;      // 1x1, C -> C
    Mask m_sl, m_dl;
};

// Softmax attention per window. tokens is (windows, c, th, tw) with
// t = th*tw tokens per window; per head, A = softmax(Q^T K / sqrt(d)) row-wise
// over keys and the output token i is sum_j A[i][j] v_j. Windows and heads are
// independent, so parallel runs are bit-identical.
Tensor window_self_attention(const Tensor& tokens, const WindowMSAWeights& w);

// Eq-level chain: split channels in half, gather p^2 tokens per window through
// each mask's expanded-window selection, attend, scatter back, concat, 1x1
// projection, residual add. Output shape = input shape.
Tensor nvsm_sa(const Tensor& x, const NVSMWeights& w, const WindowGrid& grid);

} // namespace lipt
