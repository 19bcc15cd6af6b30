// SPDX-License-Identifier: Apache-2.0
#include "lipt/windowing.hpp"

#include <stdexcept>

namespace lipt {

WindowGrid WindowGrid::make(int H, int W, int p, int s) {
    if (p < 1 || s < 1)
        throw std::invalid_argument("WindowGrid: p and s must be positive");
    if (H % p != 0 || W % p != 0)
        throw std::invalid_argument("WindowGrid: image " + std::to_string(H) + "x" +
                                    std::to_string(W) + " is not a multiple of window size " +
                                    std::to_string(p));
    if (s * p > std::min(H, W))
        throw std::invalid_argument("WindowGrid: expanded window " + std::to_string(s * p) +
                                    " exceeds min(H, W) = " + std::to_string(std::min(H, W)));
    return WindowGrid{p, s, H / p, W / p};
}

WindowedTensor window_partition(const Tensor& x, const WindowGrid& grid) {
    const Shape in = x.shape;
    if (in.h != grid.height() || in.w != grid.width())
        throw std::invalid_argument("window_partition: tensor " + in.str() +
                                    " does not match grid " + std::to_string(grid.height()) + "x" +
                                    std::to_string(grid.width()));
    const int p = grid.p;
    Tensor out({in.n * grid.windows(), in.c, p, p});
    const std::int64_t total = static_cast<std::int64_t>(in.n) * grid.windows();
#pragma omp parallel for schedule(static)
    for (std::int64_t wi = 0; wi < total; ++wi) {
        const int n = static_cast<int>(wi / grid.windows());
        const int i = static_cast<int>(wi % grid.windows()) / grid.nW;
        const int j = static_cast<int>(wi % grid.windows()) % grid.nW;
        for (int c = 0; c < in.c; ++c) {
            const float* ip = x.plane(n, c);
            float* op = out.plane(static_cast<int>(wi), c);
            for (int y = 0; y < p; ++y)
                for (int xx = 0; xx < p; ++xx)
                    op[static_cast<std::size_t>(y) * p + xx] =
                        ip[static_cast<std::size_t>(i * p + y) * in.w + (j * p + xx)];
        }
    }
    return WindowedTensor{std::move(out), in.n, grid};
}

Tensor window_merge(const WindowedTensor& windows) {
    const WindowGrid& g = windows.grid;
    const Shape in = windows.t.shape;
    if (in.n != windows.batch * g.windows() || in.h != g.p || in.w != g.p)
        throw std::invalid_argument("window_merge: window count mismatch: " + in.str() +
                                    " vs grid of " + std::to_string(g.windows()) + " windows");
    Tensor out({windows.batch, in.c, g.height(), g.width()});
    const std::int64_t total = static_cast<std::int64_t>(in.n);
#pragma omp parallel for schedule(static)
    for (std::int64_t wi = 0; wi < total; ++wi) {
        const int n = static_cast<int>(wi / g.windows());
        const int i = static_cast<int>(wi % g.windows()) / g.nW;
        const int j = static_cast<int>(wi % g.windows()) % g.nW;
        for (int c = 0; c < in.c; ++c) {
            const float* ip = windows.t.plane(static_cast<int>(wi), c);
            float* op = out.plane(n, c);
            for (int y = 0; y < g.p; ++y)
                for (int xx = 0; xx < g.p; ++xx)
                    op[static_cast<std::size_t>(i * g.p + y) * out.shape.w + (j * g.p + xx)] =
                        ip[static_cast<std::size_t>(y) * g.p + xx];
        }
    }
    return out;
}

ExpandedWindows window_expand(const WindowedTensor& windows) {
    const WindowGrid& g = windows.grid;
    const Shape in = windows.t.shape;
    if (in.n != windows.batch * g.windows() || in.h != g.p || in.w != g.p)
        throw std::invalid_argument("window_expand: window count mismatch: " + in.str());
    const int sp = g.s * g.p;
    Tensor out({in.n, in.c, sp, sp});
    const std::int64_t total = static_cast<std::int64_t>(in.n);
#pragma omp parallel for schedule(static)
    for (std::int64_t wi = 0; wi < total; ++wi) {
        const int n = static_cast<int>(wi / g.windows());
        const int i = static_cast<int>(wi % g.windows()) / g.nW;
        const int j = static_cast<int>(wi % g.windows()) % g.nW;
        for (int a = 0; a < g.s; ++a) {
            for (int b = 0; b < g.s; ++b) {
                const int src = n * g.windows() + ((i + a) % g.nH) * g.nW + ((j + b) % g.nW);
                for (int c = 0; c < in.c; ++c) {
                    const float* ip = windows.t.plane(src, c);
                    float* op = out.plane(static_cast<int>(wi), c);
                    for (int y = 0; y < g.p; ++y)
                        for (int xx = 0; xx < g.p; ++xx)
                            op[static_cast<std::size_t>(a * g.p + y) * sp + (b * g.p + xx)] =
                                ip[static_cast<std::size_t>(y) * g.p + xx];
                }
            }
        }
    }
    return ExpandedWindows{std::move(out), windows.batch, g};
}

} // namespace lipt
