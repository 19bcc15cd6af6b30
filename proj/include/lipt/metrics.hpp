// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/tensor.hpp"

namespace lipt {

// 10*log10(peak^2 / MSE), double accumulation; +infinity when MSE is 0.
double psnr(const Tensor& a, const Tensor& b, double peak = 255.0);

// Mean structural similarity, single channel: 11x11 Gaussian window with
// sigma 1.5, K1=0.01, K2=0.03, dynamic range L; valid windows only, so both
// spatial dims must be >= 11.
double ssim(const Tensor& a, const Tensor& b, double L = 255.0);

// Separable cubic-convolution resampling, Keys kernel a = -0.5, edge-clamped,
// align-centers mapping src = (dst + 0.5)/scale - 0.5. Tap weights are
// renormalized to unit sum (they already sum to 1 up to rounding). scale is
// num/den and must be one of 1/4, 1/3, 1/2, 1, 2, 3, 4.
Tensor bicubic_resize(const Tensor& x, int num, int den);

// Drop `border` pixels from every side.
Tensor crop_border(const Tensor& x, int border);

} // namespace lipt
