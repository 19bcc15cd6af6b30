// SPDX-License-Identifier: Apache-2.0
#include "lipt/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lipt {

static void check_pair(const Tensor& a, const Tensor& b, const char* who) {
    if (!(a.shape == b.shape))
        throw std::invalid_argument(std::string(who) + ": shape mismatch " + a.shape.str() +
                                    " vs " + b.shape.str());
    if (a.size() == 0)
        throw std::invalid_argument(std::string(who) + ": empty tensors");
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    check_pair(a, b, "psnr");
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    const double mse = se / static_cast<double>(a.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

static std::array<double, 11> gaussian11() {
    std::array<double, 11> g{};
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
        const double d = i - 5;
        g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g)
        v /= sum;
    return g;
}

double ssim(const Tensor& a, const Tensor& b, double L) {
    check_pair(a, b, "ssim");
    if (a.shape.n != 1 || a.shape.c != 1)
        throw std::invalid_argument("ssim: expected single-channel (1,1,h,w), got " +
                                    a.shape.str());
    const int h = a.shape.h, w = a.shape.w;
    if (h < 11 || w < 11)
        throw std::invalid_argument("ssim: image must be at least 11x11");
    const std::array<double, 11> g = gaussian11();
    const double c1 = (0.01 * L) * (0.01 * L);
    const double c2 = (0.03 * L) * (0.03 * L);
    const int oh = h - 10, ow = w - 10;

    // per-row partials, serial combine: deterministic for any thread count
    std::vector<double> row_sum(static_cast<std::size_t>(oh), 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < oh; ++y) {
        double acc = 0.0;
        for (int x = 0; x < ow; ++x) {
            double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
            for (int u = 0; u < 11; ++u) {
                const float* pa = a.data.data() + static_cast<std::size_t>(y + u) * w + x;
                const float* pb = b.data.data() + static_cast<std::size_t>(y + u) * w + x;
                for (int v = 0; v < 11; ++v) {
                    const double wgt = g[static_cast<std::size_t>(u)] * g[static_cast<std::size_t>(v)];
                    const double va = pa[v], vb = pb[v];
                    ma += wgt * va;
                    mb += wgt * vb;
                    maa += wgt * va * va;
                    mbb += wgt * vb * vb;
                    mab += wgt * va * vb;
                }
            }
            const double sa = maa - ma * ma;
            const double sb = mbb - mb * mb;
            const double sab = mab - ma * mb;
            acc += ((2 * ma * mb + c1) * (2 * sab + c2)) /
                   ((ma * ma + mb * mb + c1) * (sa + sb + c2));
        }
        row_sum[static_cast<std::size_t>(y)] = acc;
    }
    double total = 0.0;
    for (double v : row_sum)
        total += v;
    return total / (static_cast<double>(oh) * ow);
}

static double keys(double t) {
    const double x = std::abs(t);
    if (x <= 1.0)
        return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0)
        return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

namespace {
struct Taps {
    std::vector<int> idx;    // 4 per output sample, clamped
    std::vector<double> wgt; // normalized to unit sum
};
} // namespace

static Taps make_taps(int n_src, int n_dst, double inv_scale) {
    Taps t;
    t.idx.resize(static_cast<std::size_t>(n_dst) * 4);
    t.wgt.resize(static_cast<std::size_t>(n_dst) * 4);
    for (int i = 0; i < n_dst; ++i) {
        const double sx = (i + 0.5) * inv_scale - 0.5;
        const int base = static_cast<int>(std::floor(sx));
        double sum = 0.0;
        for (int j = 0; j < 4; ++j) {
            const int src = base - 1 + j;
            const double wv = keys(sx - src);
            t.idx[static_cast<std::size_t>(i) * 4 + j] = std::clamp(src, 0, n_src - 1);
            t.wgt[static_cast<std::size_t>(i) * 4 + j] = wv;
            sum += wv;
        }
        for (int j = 0; j < 4; ++j)
            t.wgt[static_cast<std::size_t>(i) * 4 + j] /= sum;
    }
    return t;
}

Tensor bicubic_resize(const Tensor& x, int num, int den) {
    static constexpr int allowed[][2] = {{1, 4}, {1, 3}, {1, 2}, {1, 1}, {2, 1}, {3, 1}, {4, 1}};
    bool ok = false;
    for (const auto& s : allowed)
        ok = ok || (num == s[0] && den == s[1]);
    if (!ok)
        throw std::invalid_argument("bicubic_resize: scale " + std::to_string(num) + "/" +
                                    std::to_string(den) + " not in {1/4,1/3,1/2,1,2,3,4}");
    const int oh = static_cast<int>(static_cast<std::int64_t>(x.shape.h) * num / den);
    const int ow = static_cast<int>(static_cast<std::int64_t>(x.shape.w) * num / den);
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("bicubic_resize: output would be empty");
    const double inv = static_cast<double>(den) / num;
    const Taps tx = make_taps(x.shape.w, ow, inv);
    const Taps ty = make_taps(x.shape.h, oh, inv);

    // horizontal pass, then vertical
    Tensor mid({x.shape.n, x.shape.c, x.shape.h, ow});
    Tensor out({x.shape.n, x.shape.c, oh, ow});
    const std::int64_t planes = static_cast<std::int64_t>(x.shape.n) * x.shape.c;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const int n = static_cast<int>(pl / x.shape.c);
        const int c = static_cast<int>(pl % x.shape.c);
        const float* ip = x.plane(n, c);
        float* mp = mid.plane(n, c);
        for (int y = 0; y < x.shape.h; ++y)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += tx.wgt[static_cast<std::size_t>(ox) * 4 + j] *
                           ip[static_cast<std::size_t>(y) * x.shape.w +
                              tx.idx[static_cast<std::size_t>(ox) * 4 + j]];
                mp[static_cast<std::size_t>(y) * ow + ox] = static_cast<float>(acc);
            }
        float* op = out.plane(n, c);
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int j = 0; j < 4; ++j)
                    acc += ty.wgt[static_cast<std::size_t>(oy) * 4 + j] *
                           mp[static_cast<std::size_t>(
                                  ty.idx[static_cast<std::size_t>(oy) * 4 + j]) *
                                  ow +
                              ox];
                op[static_cast<std::size_t>(oy) * ow + ox] = static_cast<float>(acc);
            }
    }
    return out;
}

Tensor crop_border(const Tensor& x, int border) {
    if (border < 0)
        throw std::invalid_argument("crop_border: negative border");
    if (border == 0)
        return x;
    if (x.shape.h <= 2 * border || x.shape.w <= 2 * border)
        throw std::invalid_argument("crop_border: border " + std::to_string(border) +
                                    " leaves no pixels of " + x.shape.str());
    Tensor out({x.shape.n, x.shape.c, x.shape.h - 2 * border, x.shape.w - 2 * border});
    for (int n = 0; n < x.shape.n; ++n)
        for (int c = 0; c < x.shape.c; ++c)
            for (int y = 0; y < out.shape.h; ++y) {
                const float* ip =
                    x.plane(n, c) + static_cast<std::size_t>(y + border) * x.shape.w + border;
                float* op = out.plane(n, c) + static_cast<std::size_t>(y) * out.shape.w;
                std::copy_n(ip, out.shape.w, op);
            }
    return out;
}

} // namespace lipt
