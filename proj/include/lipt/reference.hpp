// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/attention.hpp"
#include "lipt/mask.hpp"
#include "lipt/tensor.hpp"

namespace lipt::ref {

// Serial, obviously-correct counterparts of the parallel kernels. Written
// independently (double accumulators, plainest possible loops) so the fast
// paths have something to be tested and benchmarked against.

Tensor conv2d(const Tensor& input, const ConvWeights& w, int padding, int groups);

// softmax(Q^T K / sqrt(d)) V per window and head, all in double.
Tensor window_self_attention(const Tensor& tokens, const WindowMSAWeights& w);

// Drop rate via the literal stitching simulation: walk every expanded window
// of an s x s wrapped grid, union the local coordinates its mask ones
// recover, and count what window (0,0) gets back.
double beta_union(const Mask& m);

double psnr(const Tensor& a, const Tensor& b, double peak = 255.0);
double ssim(const Tensor& a, const Tensor& b, double L = 255.0);

// Direct (non-separable) 4x4-tap cubic resampling; same contract as the
// library version.
Tensor bicubic_resize(const Tensor& x, int num, int den);

} // namespace lipt::ref
