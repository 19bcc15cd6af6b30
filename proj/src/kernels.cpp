// SPDX-License-Identifier: Apache-2.0
#include "lipt/kernels.hpp"

#include <stdexcept>

namespace lipt {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int padding, int groups) {
    const Shape in = input.shape;
    const int k = w.k();
    if (w.kernel.shape.h != w.kernel.shape.w)
        throw std::invalid_argument("conv2d: kernel must be square, got " + w.kernel.shape.str());
    if (groups < 1 || in.c != groups * w.c_in() || w.c_out() % groups != 0)
        throw std::invalid_argument("conv2d: shape mismatch: input " + in.str() + " vs kernel " +
                                    w.kernel.shape.str() + " with groups " + std::to_string(groups));
    if (static_cast<int>(w.bias.size()) != w.c_out())
        throw std::invalid_argument("conv2d: bias size " + std::to_string(w.bias.size()) +
                                    " != c_out " + std::to_string(w.c_out()));
    const int oh = in.h + 2 * padding - k + 1;
    const int ow = in.w + 2 * padding - k + 1;
    if (oh < 1 || ow < 1)
        throw std::invalid_argument("conv2d: kernel larger than padded input");

    Tensor out({in.n, w.c_out(), oh, ow});
    const int ocpg = w.c_out() / groups;
    const int icpg = w.c_in();
    const std::int64_t planes = static_cast<std::int64_t>(in.n) * w.c_out();

#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const int n = static_cast<int>(pl / w.c_out());
        const int oc = static_cast<int>(pl % w.c_out());
        const int g = oc / ocpg;
        float* op = out.plane(n, oc);
        const float b = w.bias[oc];
        for (int i = 0; i < oh * ow; ++i)
            op[i] = b;
        for (int ci = 0; ci < icpg; ++ci) {
            const float* ip = input.plane(n, g * icpg + ci);
            for (int ku = 0; ku < k; ++ku) {
                const int ylo = std::max(0, padding - ku);
                const int yhi = std::min(oh, in.h + padding - ku);
                for (int kv = 0; kv < k; ++kv) {
                    const float kval = w.kernel.at(oc, ci, ku, kv);
                    const int xlo = std::max(0, padding - kv);
                    const int xhi = std::min(ow, in.w + padding - kv);
                    for (int oy = ylo; oy < yhi; ++oy) {
                        const float* irow = ip + static_cast<std::size_t>(oy + ku - padding) * in.w +
                                            (kv - padding);
                        float* orow = op + static_cast<std::size_t>(oy) * ow;
                        for (int ox = xlo; ox < xhi; ++ox)
                            orow[ox] += kval * irow[ox];
                    }
                }
            }
        }
    }
    return out;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape);
    const std::int64_t total = static_cast<std::int64_t>(input.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i)
        out.data[i] = input.data[i] > 0.0f ? input.data[i] : 0.0f;
    return out;
}

Tensor avg_pool3x3_same(const Tensor& input) {
    const Shape in = input.shape;
    Tensor out(in);
    const std::int64_t planes = static_cast<std::int64_t>(in.n) * in.c;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const float* ip = input.data.data() + pl * in.h * in.w;
        float* op = out.data.data() + pl * in.h * in.w;
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                float acc = 0.0f;
                for (int u = -1; u <= 1; ++u) {
                    const int iy = y + u;
                    if (iy < 0 || iy >= in.h)
                        continue;
                    for (int v = -1; v <= 1; ++v) {
                        const int ix = x + v;
                        if (ix < 0 || ix >= in.w)
                            continue;
                        acc += ip[static_cast<std::size_t>(iy) * in.w + ix];
                    }
                }
                op[static_cast<std::size_t>(y) * in.w + x] = acc * (1.0f / 9.0f);
            }
        }
    }
    return out;
}

Tensor pixel_shuffle(const Tensor& input, int r) {
    const Shape in = input.shape;
    if (r < 1 || in.c % (r * r) != 0)
        throw std::invalid_argument("pixel_shuffle: channels " + std::to_string(in.c) +
                                    " not divisible by r^2 with r=" + std::to_string(r));
    const int co = in.c / (r * r);
    Tensor out({in.n, co, in.h * r, in.w * r});
    const std::int64_t planes = static_cast<std::int64_t>(in.n) * co;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const int n = static_cast<int>(pl / co);
        const int o = static_cast<int>(pl % co);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) {
                const float* ip = input.plane(n, o * r * r + a * r + b);
                for (int y = 0; y < in.h; ++y)
                    for (int x = 0; x < in.w; ++x)
                        out.at(n, o, y * r + a, x * r + b) =
                            ip[static_cast<std::size_t>(y) * in.w + x];
            }
    }
    return out;
}

Tensor pad_reflect(const Tensor& input, int right, int bottom) {
    const Shape in = input.shape;
    if (right < 0 || bottom < 0 || right >= in.w || bottom >= in.h)
        throw std::invalid_argument("pad_reflect: pad (" + std::to_string(right) + "," +
                                    std::to_string(bottom) + ") must be smaller than image " +
                                    std::to_string(in.w) + "x" + std::to_string(in.h));
    Tensor out({in.n, in.c, in.h + bottom, in.w + right});
    const std::int64_t planes = static_cast<std::int64_t>(in.n) * in.c;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const float* ip = input.data.data() + pl * in.h * in.w;
        float* op = out.data.data() + pl * out.shape.h * out.shape.w;
        for (int y = 0; y < out.shape.h; ++y) {
            const int sy = y < in.h ? y : 2 * in.h - 2 - y;
            for (int x = 0; x < out.shape.w; ++x) {
                const int sx = x < in.w ? x : 2 * in.w - 2 - x;
                op[static_cast<std::size_t>(y) * out.shape.w + x] =
                    ip[static_cast<std::size_t>(sy) * in.w + sx];
            }
        }
    }
    return out;
}

Tensor crop(const Tensor& input, int h, int w) {
    const Shape in = input.shape;
    if (h < 1 || w < 1 || h > in.h || w > in.w)
        throw std::invalid_argument("crop: target " + std::to_string(h) + "x" + std::to_string(w) +
                                    " exceeds input " + in.str());
    Tensor out({in.n, in.c, h, w});
    const std::int64_t planes = static_cast<std::int64_t>(in.n) * in.c;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const float* ip = input.data.data() + pl * in.h * in.w;
        float* op = out.data.data() + pl * static_cast<std::size_t>(h) * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                op[static_cast<std::size_t>(y) * w + x] = ip[static_cast<std::size_t>(y) * in.w + x];
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!(a.shape == b.shape))
        throw std::invalid_argument("add: shape mismatch " + a.shape.str() + " vs " + b.shape.str());
    Tensor out(a.shape);
    const std::int64_t total = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i)
        out.data[i] = a.data[i] + b.data[i];
    return out;
}

Tensor slice_channels(const Tensor& input, int c0, int c1) {
    const Shape in = input.shape;
    if (c0 < 0 || c1 > in.c || c0 >= c1)
        throw std::invalid_argument("slice_channels: bad range [" + std::to_string(c0) + "," +
                                    std::to_string(c1) + ") for " + std::to_string(in.c) +
                                    " channels");
    Tensor out({in.n, c1 - c0, in.h, in.w});
    const std::size_t plane = static_cast<std::size_t>(in.h) * in.w;
    for (int n = 0; n < in.n; ++n)
        for (int c = c0; c < c1; ++c)
            std::copy_n(input.plane(n, c), plane, out.plane(n, c - c0));
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.shape.n != b.shape.n || a.shape.h != b.shape.h || a.shape.w != b.shape.w)
        throw std::invalid_argument("concat_channels: shape mismatch " + a.shape.str() + " vs " +
                                    b.shape.str());
    Tensor out({a.shape.n, a.shape.c + b.shape.c, a.shape.h, a.shape.w});
    const std::size_t plane = static_cast<std::size_t>(a.shape.h) * a.shape.w;
    for (int n = 0; n < a.shape.n; ++n) {
        for (int c = 0; c < a.shape.c; ++c)
            std::copy_n(a.plane(n, c), plane, out.plane(n, c));
        for (int c = 0; c < b.shape.c; ++c)
            std::copy_n(b.plane(n, c), plane, out.plane(n, a.shape.c + c));
    }
    return out;
}

} // namespace lipt
