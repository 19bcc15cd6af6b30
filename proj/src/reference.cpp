// SPDX-License-Identifier: Apache-2.0
#include "lipt/reference.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lipt::ref {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int padding, int groups) {
    const int k = w.k();
    const int cig = w.c_in();
    const int cog = w.c_out() / groups;
    if (input.shape.c != groups * cig || w.c_out() % groups != 0)
        throw std::invalid_argument("ref::conv2d: channel/group mismatch");
    const int oh = input.shape.h + 2 * padding - k + 1;
    const int ow = input.shape.w + 2 * padding - k + 1;
    Tensor out({input.shape.n, w.c_out(), oh, ow});
    for (int n = 0; n < input.shape.n; ++n)
        for (int co = 0; co < w.c_out(); ++co) {
            const int g = co / cog;
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = w.bias[static_cast<std::size_t>(co)];
                    for (int ci = 0; ci < cig; ++ci)
                        for (int ku = 0; ku < k; ++ku)
                            for (int kv = 0; kv < k; ++kv) {
                                const int iy = oy + ku - padding;
                                const int ix = ox + kv - padding;
                                if (iy < 0 || iy >= input.shape.h || ix < 0 ||
                                    ix >= input.shape.w)
                                    continue;
                                acc += static_cast<double>(
                                           input.at(n, g * cig + ci, iy, ix)) *
                                       w.kernel.at(co, ci, ku, kv);
                            }
                    out.at(n, co, oy, ox) = static_cast<float>(acc);
                }
        }
    return out;
}

Tensor window_self_attention(const Tensor& tokens, const WindowMSAWeights& w) {
    const int c = tokens.shape.c;
    const int t = tokens.shape.h * tokens.shape.w;
    if (w.heads < 1 || c % w.heads != 0)
        throw std::invalid_argument("ref::window_self_attention: bad heads");
    const int d = c / w.heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Tensor out(tokens.shape);

    std::vector<double> q(static_cast<std::size_t>(c) * t), kk(q.size()), v(q.size());
    for (int win = 0; win < tokens.shape.n; ++win) {
        for (int m = 0; m < c; ++m)
            for (int i = 0; i < t; ++i) {
                double aq = w.Wq.bias[static_cast<std::size_t>(m)];
                double ak = w.Wk.bias[static_cast<std::size_t>(m)];
                double av = w.Wv.bias[static_cast<std::size_t>(m)];
                for (int ch = 0; ch < c; ++ch) {
                    const double xv = tokens.plane(win, ch)[i];
                    aq += static_cast<double>(
                              w.Wq.kernel.data[static_cast<std::size_t>(m) * c + ch]) *
                          xv;
                    ak += static_cast<double>(
                              w.Wk.kernel.data[static_cast<std::size_t>(m) * c + ch]) *
                          xv;
                    av += static_cast<double>(
                              w.Wv.kernel.data[static_cast<std::size_t>(m) * c + ch]) *
                          xv;
                }
                q[static_cast<std::size_t>(m) * t + i] = aq;
                kk[static_cast<std::size_t>(m) * t + i] = ak;
                v[static_cast<std::size_t>(m) * t + i] = av;
            }
        for (int h = 0; h < w.heads; ++h) {
            const int c0 = h * d;
            for (int i = 0; i < t; ++i) {
                std::vector<double> row(static_cast<std::size_t>(t));
                double mx = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < t; ++j) {
                    double s = 0.0;
                    for (int m = 0; m < d; ++m)
                        s += q[static_cast<std::size_t>(c0 + m) * t + i] *
                             kk[static_cast<std::size_t>(c0 + m) * t + j];
                    row[static_cast<std::size_t>(j)] = s * scale;
                    mx = std::max(mx, row[static_cast<std::size_t>(j)]);
                }
                double sum = 0.0;
                for (int j = 0; j < t; ++j) {
                    row[static_cast<std::size_t>(j)] = std::exp(row[static_cast<std::size_t>(j)] - mx);
                    sum += row[static_cast<std::size_t>(j)];
                }
                for (int m = 0; m < d; ++m) {
                    double acc = 0.0;
                    for (int j = 0; j < t; ++j)
                        acc += row[static_cast<std::size_t>(j)] / sum *
                               v[static_cast<std::size_t>(c0 + m) * t + j];
                    out.plane(win, c0 + m)[i] = static_cast<float>(acc);
                }
            }
        }
    }
    return out;
}

double beta_union(const Mask& m) {
    const int p = m.p, s = m.s;
    const int n = s; // s x s window grid realizes every wrap offset
    std::set<std::pair<int, int>> recovered;
    for (int k = 0; k < n; ++k)
        for (int mm = 0; mm < n; ++mm) {
            // window (0,0) sits at sub-block ((0-k) mod n, (0-mm) mod n) of
            // the expanded window anchored at (k, mm)
            const int a = ((0 - k) % n + n) % n;
            const int b = ((0 - mm) % n + n) % n;
            if (a >= s || b >= s)
                continue;
            for (int x = 0; x < p; ++x)
                for (int y = 0; y < p; ++y)
                    if (m.bit(a * p + x, b * p + y))
                        recovered.insert({x, y});
        }
    return 1.0 - static_cast<double>(recovered.size()) / (static_cast<double>(p) * p);
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    if (!(a.shape == b.shape) || a.size() == 0)
        throw std::invalid_argument("ref::psnr: bad inputs");
    double se = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    if (se == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak * static_cast<double>(a.size()) / se);
}

double ssim(const Tensor& a, const Tensor& b, double L) {
    if (!(a.shape == b.shape) || a.shape.n != 1 || a.shape.c != 1 || a.shape.h < 11 ||
        a.shape.w < 11)
        throw std::invalid_argument("ref::ssim: bad inputs");
    double g[11];
    double gsum = 0.0;
    for (int i = 0; i < 11; ++i) {
        g[i] = std::exp(-(i - 5.0) * (i - 5.0) / 4.5);
        gsum += g[i];
    }
    for (double& v : g)
        v /= gsum;
    const double c1l = (0.01 * L) * (0.01 * L);
    const double c2l = (0.03 * L) * (0.03 * L);
    const int h = a.shape.h, w = a.shape.w;
    double total = 0.0;
    int count = 0;
    for (int y = 0; y + 11 <= h; ++y)
        for (int x = 0; x + 11 <= w; ++x) {
            double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
            for (int u = 0; u < 11; ++u)
                for (int v = 0; v < 11; ++v) {
                    const double wgt = g[u] * g[v];
                    const double va = a.at(0, 0, y + u, x + v);
                    const double vb = b.at(0, 0, y + u, x + v);
                    ma += wgt * va;
                    mb += wgt * vb;
                    saa += wgt * va * va;
                    sbb += wgt * vb * vb;
                    sab += wgt * va * vb;
                }
            const double var_a = saa - ma * ma;
            const double var_b = sbb - mb * mb;
            const double cov = sab - ma * mb;
            total += ((2 * ma * mb + c1l) * (2 * cov + c2l)) /
                     ((ma * ma + mb * mb + c1l) * (var_a + var_b + c2l));
            ++count;
        }
    return total / count;
}

static double keys(double t) {
    const double x = std::abs(t);
    if (x <= 1.0)
        return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0)
        return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

Tensor bicubic_resize(const Tensor& x, int num, int den) {
    const int oh = static_cast<int>(static_cast<std::int64_t>(x.shape.h) * num / den);
    const int ow = static_cast<int>(static_cast<std::int64_t>(x.shape.w) * num / den);
    const double inv = static_cast<double>(den) / num;
    Tensor out({x.shape.n, x.shape.c, oh, ow});
    const auto clampi = [](int v, int n) { return v < 0 ? 0 : (v >= n ? n - 1 : v); };
    for (int n = 0; n < x.shape.n; ++n)
        for (int c = 0; c < x.shape.c; ++c)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const double sy = (oy + 0.5) * inv - 0.5;
                    const double sx = (ox + 0.5) * inv - 0.5;
                    const int by = static_cast<int>(std::floor(sy));
                    const int bx = static_cast<int>(std::floor(sx));
                    double acc = 0.0, wsum = 0.0;
                    for (int u = -1; u <= 2; ++u)
                        for (int v = -1; v <= 2; ++v) {
                            const double wgt = keys(sy - (by + u)) * keys(sx - (bx + v));
                            acc += wgt * x.at(n, c, clampi(by + u, x.shape.h),
                                              clampi(bx + v, x.shape.w));
                            wsum += wgt;
                        }
                    out.at(n, c, oy, ox) = static_cast<float>(acc / wsum);
                }
    return out;
}

} // namespace lipt::ref
