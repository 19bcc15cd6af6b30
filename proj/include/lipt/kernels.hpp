// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/tensor.hpp"

namespace lipt {

// Direct 2-D convolution (cross-correlation, stride 1, zero padding).
// input channels must equal groups * w.c_in(). Summation order per output
// element is fixed: bias, then input channels, kernel taps row-major inside
// each channel. Parallelism is only across independent output elements, so
// results are bit-identical for any thread count.
Tensor conv2d(const Tensor& input, const ConvWeights& w, int padding, int groups);
inline Tensor conv2d(const Tensor& input, const ConvWeights& w, int padding) {
    return conv2d(input, w, padding, w.groups);
}

Tensor relu(const Tensor& input);

// 3x3 mean filter, zero padding 1, stride 1; divisor is always 9.
Tensor avg_pool3x3_same(const Tensor& input);

// (n, c, h, w) -> (n, c/r^2, h*r, w*r); input channel o*r^2 + a*r + b lands at
// output channel o, sub-position (a, b) of each r x r cell.
Tensor pixel_shuffle(const Tensor& input, int r);

// Reflect padding (edge pixel not duplicated) on the right/bottom only.
Tensor pad_reflect(const Tensor& input, int right, int bottom);

// Top-left crop to (h, w).
Tensor crop(const Tensor& input, int h, int w);

Tensor add(const Tensor& a, const Tensor& b);

// Channel slice [c0, c1) of every batch item.
Tensor slice_channels(const Tensor& input, int c0, int c1);
Tensor concat_channels(const Tensor& a, const Tensor& b);

} // namespace lipt
