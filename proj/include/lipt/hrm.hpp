// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/kernels.hpp"
#include "lipt/tensor.hpp"

#include <vector>

namespace lipt {

inline constexpr float kSqrt2f = 1.41421356237309504880f;

// Fixed isotropic Sobel filters; both sum to exactly zero, so their fused
// bias never sees the pre-projection bias.
inline constexpr float kSobelDx[9] = {1.0f, 0.0f, -1.0f,     kSqrt2f, 0.0f, -kSqrt2f,
                                      1.0f, 0.0f, -1.0f};
inline constexpr float kSobelDy[9] = {-1.0f, -kSqrt2f, -1.0f, 0.0f, 0.0f, 0.0f,
                                      1.0f,  kSqrt2f,  1.0f};

// F_x = (s_x . d_x) (*) (k_x * I + b_x) + b_dx, same for y; output is
// F_x + F_y. (*) is depthwise with the fixed filter scaled per channel.
struct SobelBranch {
    ConvWeights k_x, k_y;          // 1x1, c -> c, biases b_x / b_y
    std::vector<float> s_x, s_y;   // per-channel scales on d_x / d_y
    std::vector<float> b_dx, b_dy; // per-channel post-filter biases
};

// Five-branch training-form conv block. Composite branches apply their 1x1 to
// the zero-padded input (padding ring becomes the 1x1 bias) and then a valid
// 3x3; this is the convention under which the single-kernel fusion is exact
// at image borders, not just in the interior.
struct GbWeights {
    ConvWeights conv1;       // 1x1
    ConvWeights pre3;        // 1x1 feeding conv3_after
    ConvWeights conv3_after; // 3x3 on pre3's output
    SobelBranch sobel;
    ConvWeights avg_pre;     // 1x1 feeding the fixed 3x3 mean
    ConvWeights conv3;       // 3x3; the only branch kept when with_extras is off
    bool with_extras = true; // off = plain conv block ablation
    bool with_sobel = true;  // off drops only the Sobel branch
};

struct HRMWeights {
    GbWeights gb1, gb2;
};

struct FusedConv3x3 {
    ConvWeights conv; // 3x3, c -> c
};

struct FusedHRM {
    FusedConv3x3 f1, f2;
};

Tensor isotropic_sobel(const Tensor& x, const SobelBranch& w);

// Sum of the five branch outputs (fewer under the ablation flags).
Tensor gb_forward(const Tensor& x, const GbWeights& w);

// Exact algebraic collapse into one 3x3; accumulation in double. Matches
// gb_forward within 1e-4 max abs on finite inputs, borders included.
FusedConv3x3 fuse_gb(const GbWeights& w);
FusedHRM fuse_hrm(const HRMWeights& w);

// x + gb2(relu(gb1(x))), training or fused form.
Tensor hrm_forward(const Tensor& x, const HRMWeights& w);
Tensor hrm_forward(const Tensor& x, const FusedHRM& w);

} // namespace lipt
