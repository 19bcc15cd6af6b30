// SPDX-License-Identifier: Apache-2.0
#include "lipt/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lipt {

static void check_msa(const Tensor& tokens, const WindowMSAWeights& w) {
    const int c = tokens.shape.c;
    if (w.Wq.c_in() != c || w.Wq.c_out() != c || w.Wk.c_in() != c || w.Wk.c_out() != c ||
        w.Wv.c_in() != c || w.Wv.c_out() != c)
        throw std::invalid_argument("window_self_attention: projections must be c->c, c=" +
                                    std::to_string(c));
    if (w.Wq.k() != 1 || w.Wk.k() != 1 || w.Wv.k() != 1)
        throw std::invalid_argument("window_self_attention: projections must be 1x1");
    if (w.heads < 1 || c % w.heads != 0)
        throw std::invalid_argument("window_self_attention: c=" + std::to_string(c) +
                                    " not divisible by heads=" + std::to_string(w.heads));
}

Tensor window_self_attention(const Tensor& tokens, const WindowMSAWeights& w) {
    check_msa(tokens, w);
    const int c = tokens.shape.c;
    const int t = tokens.shape.h * tokens.shape.w;
    const int d = c / w.heads;
    const float scale = 1.0f / std::sqrt(static_cast<float>(d));

    const Tensor Q = conv2d(tokens, w.Wq, 0, 1);
    const Tensor K = conv2d(tokens, w.Wk, 0, 1);
    const Tensor V = conv2d(tokens, w.Wv, 0, 1);

    Tensor out(tokens.shape);
    const std::int64_t units = static_cast<std::int64_t>(tokens.shape.n) * w.heads;
#pragma omp parallel for schedule(static)
    for (std::int64_t u = 0; u < units; ++u) {
        const int win = static_cast<int>(u / w.heads);
        const int c0 = static_cast<int>(u % w.heads) * d;
        std::vector<float> A(static_cast<std::size_t>(t) * t, 0.0f);

        // scores[i][j] = q_i . k_j, accumulated channel-by-channel
        for (int m = 0; m < d; ++m) {
            const float* q = Q.plane(win, c0 + m);
            const float* k = K.plane(win, c0 + m);
            for (int i = 0; i < t; ++i) {
                float* row = A.data() + static_cast<std::size_t>(i) * t;
                const float qi = q[i];
                for (int j = 0; j < t; ++j)
                    row[j] += qi * k[j];
            }
        }
        for (int i = 0; i < t; ++i) {
            float* row = A.data() + static_cast<std::size_t>(i) * t;
            float mx = row[0] * scale;
            for (int j = 0; j < t; ++j) {
                row[j] *= scale;
                mx = std::max(mx, row[j]);
            }
            float sum = 0.0f;
            for (int j = 0; j < t; ++j) {
                row[j] = std::exp(row[j] - mx);
                sum += row[j];
            }
            const float inv = 1.0f / sum;
            for (int j = 0; j < t; ++j)
                row[j] *= inv;
        }
        for (int m = 0; m < d; ++m) {
            const float* v = V.plane(win, c0 + m);
            float* o = out.plane(win, c0 + m);
            for (int i = 0; i < t; ++i) {
                const float* row = A.data() + static_cast<std::size_t>(i) * t;
                float acc = 0.0f;
                for (int j = 0; j < t; ++j)
                    acc += row[j] * v[j];
                o[i] = acc;
            }
        }
    }
    return out;
}

Tensor nvsm_sa(const Tensor& x, const NVSMWeights& w, const WindowGrid& grid) {
    const int C = x.shape.c;
    if (C % 2 != 0)
        throw std::invalid_argument("nvsm_sa: channel count must be even, got " +
                                    std::to_string(C));
    if (x.shape.h != grid.height() || x.shape.w != grid.width())
        throw std::invalid_argument("nvsm_sa: tensor " + x.shape.str() +
                                    " does not match window grid");
    if (w.slwa.Wq.c_in() != C / 2 || w.dlwa.Wq.c_in() != C / 2)
        throw std::invalid_argument("nvsm_sa: attention paths must each cover C/2 channels");
    if (w.proj.c_in() != C || w.proj.c_out() != C || w.proj.k() != 1)
        throw std::invalid_argument("nvsm_sa: proj must be 1x1, C->C");

    // selection_indices rejects volatile or over-covering masks
    const IndexPlan plan_sl = selection_indices(w.m_sl, grid);
    const IndexPlan plan_dl = selection_indices(w.m_dl, grid);

    const Tensor xs = slice_channels(x, 0, C / 2);
    const Tensor xd = slice_channels(x, C / 2, C);

    const Tensor ys = scatter_windows(
        window_self_attention(gather_windows(xs, plan_sl), w.slwa), plan_sl, x.shape.n);
    const Tensor yd = scatter_windows(
        window_self_attention(gather_windows(xd, plan_dl), w.dlwa), plan_dl, x.shape.n);

    const Tensor merged = concat_channels(ys, yd);
    return add(conv2d(merged, w.proj, 0, 1), x);
}

} // namespace lipt
