// SPDX-License-Identifier: Apache-2.0
#include "lipt/hrm.hpp"

#include <stdexcept>
#include <string>

namespace lipt {

static void check_1x1(const ConvWeights& w, int c, const char* name) {
    if (w.k() != 1 || w.c_in() != c || w.c_out() != c)
        throw std::invalid_argument(std::string(name) + ": expected 1x1 " + std::to_string(c) +
                                    "->" + std::to_string(c));
}

static void check_3x3(const ConvWeights& w, int c, const char* name) {
    if (w.k() != 3 || w.c_in() != c || w.c_out() != c)
        throw std::invalid_argument(std::string(name) + ": expected 3x3 " + std::to_string(c) +
                                    "->" + std::to_string(c));
}

static void check_sobel(const SobelBranch& w, int c) {
    check_1x1(w.k_x, c, "sobel.k_x");
    check_1x1(w.k_y, c, "sobel.k_y");
    if (static_cast<int>(w.s_x.size()) != c || static_cast<int>(w.s_y.size()) != c ||
        static_cast<int>(w.b_dx.size()) != c || static_cast<int>(w.b_dy.size()) != c)
        throw std::invalid_argument("sobel: per-channel vectors must have length " +
                                    std::to_string(c));
}

static ConvWeights scaled_depthwise(const float* d, const std::vector<float>& scale,
                                    const std::vector<float>& bias) {
    const int c = static_cast<int>(scale.size());
    ConvWeights w;
    w.kernel = Tensor({c, 1, 3, 3});
    w.bias = bias;
    w.groups = c;
    for (int o = 0; o < c; ++o)
        for (int t = 0; t < 9; ++t)
            w.kernel.data[static_cast<std::size_t>(o) * 9 + t] = scale[o] * d[t];
    return w;
}

Tensor isotropic_sobel(const Tensor& x, const SobelBranch& w) {
    const int c = x.shape.c;
    check_sobel(w, c);
    // 1x1 with padding 1: the ring becomes the projection bias, which the
    // valid depthwise step then consumes exactly as the fused kernel would.
    const Tensor fx = conv2d(conv2d(x, w.k_x, 1, 1), scaled_depthwise(kSobelDx, w.s_x, w.b_dx), 0, c);
    const Tensor fy = conv2d(conv2d(x, w.k_y, 1, 1), scaled_depthwise(kSobelDy, w.s_y, w.b_dy), 0, c);
    return add(fx, fy);
}

static ConvWeights mean3x3(int c) {
    ConvWeights w;
    w.kernel = Tensor::full({c, 1, 3, 3}, 1.0f / 9.0f);
    w.bias.assign(static_cast<std::size_t>(c), 0.0f);
    w.groups = c;
    return w;
}

Tensor gb_forward(const Tensor& x, const GbWeights& w) {
    const int c = x.shape.c;
    check_3x3(w.conv3, c, "conv3");
    Tensor out = conv2d(x, w.conv3, 1, 1);
    if (!w.with_extras)
        return out;
    check_1x1(w.conv1, c, "conv1");
    check_1x1(w.pre3, c, "pre3");
    check_3x3(w.conv3_after, c, "conv3_after");
    check_1x1(w.avg_pre, c, "avg_pre");
    out = add(out, conv2d(x, w.conv1, 0, 1));
    out = add(out, conv2d(conv2d(x, w.pre3, 1, 1), w.conv3_after, 0, 1));
    if (w.with_sobel)
        out = add(out, isotropic_sobel(x, w.sobel));
    out = add(out, conv2d(conv2d(x, w.avg_pre, 1, 1), mean3x3(c), 0, c));
    return out;
}

FusedConv3x3 fuse_gb(const GbWeights& w) {
    const int c = w.conv3.c_out();
    check_3x3(w.conv3, c, "conv3");
    std::vector<double> K(static_cast<std::size_t>(c) * c * 9, 0.0);
    std::vector<double> B(static_cast<std::size_t>(c), 0.0);
    const auto at = [c](int o, int i, int u, int v) {
        return ((static_cast<std::size_t>(o) * c + i) * 3 + u) * 3 + v;
    };

    for (int o = 0; o < c; ++o) {
        for (int i = 0; i < c; ++i)
            for (int t = 0; t < 9; ++t)
                K[at(o, i, t / 3, t % 3)] += w.conv3.kernel.data[(static_cast<std::size_t>(o) * c + i) * 9 + t];
        B[o] += w.conv3.bias[o];
    }

    if (w.with_extras) {
        check_1x1(w.conv1, c, "conv1");
        check_1x1(w.pre3, c, "pre3");
        check_3x3(w.conv3_after, c, "conv3_after");
        if (w.with_sobel)
            check_sobel(w.sobel, c);
        check_1x1(w.avg_pre, c, "avg_pre");

        // conv1: embed at the center tap
        for (int o = 0; o < c; ++o) {
            for (int i = 0; i < c; ++i)
                K[at(o, i, 1, 1)] += w.conv1.kernel.data[static_cast<std::size_t>(o) * c + i];
            B[o] += w.conv1.bias[o];
        }

        // pre3 -> conv3_after: K_eff[o,i,u,v] = sum_m K3[o,m,u,v] K1[m,i];
        // bias picks up every tap's share of the 1x1 bias.
        for (int o = 0; o < c; ++o) {
            for (int m = 0; m < c; ++m) {
                const float* k3 = w.conv3_after.kernel.data.data() +
                                  (static_cast<std::size_t>(o) * c + m) * 9;
                const float b1 = w.pre3.bias[m];
                double ksum = 0.0;
                for (int t = 0; t < 9; ++t)
                    ksum += static_cast<double>(k3[t]);
                B[o] += ksum * b1;
                for (int i = 0; i < c; ++i) {
                    const double k1 = w.pre3.kernel.data[static_cast<std::size_t>(m) * c + i];
                    for (int t = 0; t < 9; ++t)
                        K[at(o, i, t / 3, t % 3)] += static_cast<double>(k3[t]) * k1;
                }
            }
            B[o] += w.conv3_after.bias[o];
        }

        if (w.with_sobel) {
            for (int dir = 0; dir < 2; ++dir) {
                const float* d = dir == 0 ? kSobelDx : kSobelDy;
                const ConvWeights& pre = dir == 0 ? w.sobel.k_x : w.sobel.k_y;
                const std::vector<float>& s = dir == 0 ? w.sobel.s_x : w.sobel.s_y;
                const std::vector<float>& bd = dir == 0 ? w.sobel.b_dx : w.sobel.b_dy;
                double dsum = 0.0;
                for (int t = 0; t < 9; ++t)
                    dsum += static_cast<double>(d[t]); // exactly 0
                for (int o = 0; o < c; ++o) {
                    for (int i = 0; i < c; ++i) {
                        const double kpre = pre.kernel.data[static_cast<std::size_t>(o) * c + i];
                        for (int t = 0; t < 9; ++t)
                            K[at(o, i, t / 3, t % 3)] += static_cast<double>(s[o]) * d[t] * kpre;
                    }
                    B[o] += static_cast<double>(s[o]) * dsum * pre.bias[o] + bd[o];
                }
            }
        }

        // avg: depthwise all-1/9 after the 1x1; kernel sum is 1
        double asum = 0.0;
        for (int t = 0; t < 9; ++t)
            asum += 1.0 / 9.0;
        for (int o = 0; o < c; ++o) {
            for (int i = 0; i < c; ++i) {
                const double kpre = w.avg_pre.kernel.data[static_cast<std::size_t>(o) * c + i];
                for (int t = 0; t < 9; ++t)
                    K[at(o, i, t / 3, t % 3)] += (1.0 / 9.0) * kpre;
            }
            B[o] += asum * w.avg_pre.bias[o];
        }
    }

    FusedConv3x3 f;
    f.conv.kernel = Tensor({c, c, 3, 3});
    f.conv.bias.resize(static_cast<std::size_t>(c));
    f.conv.groups = 1;
    for (std::size_t i = 0; i < K.size(); ++i)
        f.conv.kernel.data[i] = static_cast<float>(K[i]);
    for (int o = 0; o < c; ++o)
        f.conv.bias[static_cast<std::size_t>(o)] = static_cast<float>(B[static_cast<std::size_t>(o)]);
    return f;
}

FusedHRM fuse_hrm(const HRMWeights& w) {
    return FusedHRM{fuse_gb(w.gb1), fuse_gb(w.gb2)};
}

Tensor hrm_forward(const Tensor& x, const HRMWeights& w) {
    return add(x, gb_forward(relu(gb_forward(x, w.gb1)), w.gb2));
}

Tensor hrm_forward(const Tensor& x, const FusedHRM& w) {
    return add(x, conv2d(relu(conv2d(x, w.f1.conv, 1, 1)), w.f2.conv, 1, 1));
}

} // namespace lipt
