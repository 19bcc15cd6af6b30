// SPDX-License-Identifier: Apache-2.0
#include "lipt/mask.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lipt {

int Mask::ones() const {
    int n = 0;
    for (std::uint8_t b : bits)
        n += b != 0;
    return n;
}

Mask mask_from_assignment(const AssignmentMap& phi) {
    if (phi.p < 1 || phi.s < 1 || static_cast<int>(phi.target.size()) != phi.p * phi.p)
        throw std::invalid_argument("mask_from_assignment: malformed assignment map");
    Mask m{phi.p, phi.s, std::vector<std::uint8_t>(static_cast<std::size_t>(phi.s * phi.p) *
                                                       (phi.s * phi.p),
                                                   0)};
    for (int x = 0; x < phi.p; ++x)
        for (int y = 0; y < phi.p; ++y) {
            const int t = phi.at(x, y);
            if (t < 0 || t >= phi.s * phi.s)
                throw std::invalid_argument("mask_from_assignment: target out of range");
            const int a = t / phi.s, b = t % phi.s;
            m.bits[static_cast<std::size_t>(a * phi.p + x) * m.side() + (b * phi.p + y)] = 1;
        }
    return m;
}

Mask sparse_mask(int p, int s) {
    AssignmentMap phi{p, s, std::vector<int>(static_cast<std::size_t>(p) * p)};
    for (int x = 0; x < p; ++x)
        for (int y = 0; y < p; ++y)
            phi.target[static_cast<std::size_t>(x) * p + y] = (x % s) * s + (y % s);
    return mask_from_assignment(phi);
}

Mask dense_block_mask(int p, int s) {
    AssignmentMap phi{p, s, std::vector<int>(static_cast<std::size_t>(p) * p, 0)};
    return mask_from_assignment(phi);
}

Mask global_stride_mask(int p, int s) {
    Mask m{p, s,
           std::vector<std::uint8_t>(static_cast<std::size_t>(s * p) * (s * p), 0)};
    for (int r = 0; r < m.side(); r += s)
        for (int c = 0; c < m.side(); c += s)
            m.bits[static_cast<std::size_t>(r) * m.side() + c] = 1;
    return m;
}

std::vector<int> coverage_map(const Mask& m) {
    std::vector<int> cov(static_cast<std::size_t>(m.p) * m.p, 0);
    for (int a = 0; a < m.s; ++a)
        for (int b = 0; b < m.s; ++b)
            for (int x = 0; x < m.p; ++x)
                for (int y = 0; y < m.p; ++y)
                    if (m.bit(a * m.p + x, b * m.p + y))
                        ++cov[static_cast<std::size_t>(x) * m.p + y];
    return cov;
}

double beta(const Mask& m) {
    const std::vector<int> cov = coverage_map(m);
    int covered = 0;
    for (int c : cov)
        covered += c > 0;
    return 1.0 - static_cast<double>(covered) / (static_cast<double>(m.p) * m.p);
}

bool is_non_volatile(const Mask& m) {
    for (int c : coverage_map(m))
        if (c == 0)
            return false;
    return true;
}

IndexPlan selection_indices(const Mask& m, const WindowGrid& grid) {
    if (m.p != grid.p || m.s != grid.s)
        throw std::invalid_argument("selection_indices: mask (p=" + std::to_string(m.p) +
                                    ",s=" + std::to_string(m.s) + ") does not match grid (p=" +
                                    std::to_string(grid.p) + ",s=" + std::to_string(grid.s) + ")");
    // diagnose dropped coordinates before duplicates: a mask can do both
    const std::vector<int> cov = coverage_map(m);
    for (int c : cov)
        if (c == 0)
            throw std::invalid_argument("selection_indices: mask violates non-volatility");
    for (int c : cov)
        if (c > 1)
            throw std::invalid_argument("selection_indices: mask over-covers");

    IndexPlan plan;
    plan.p = grid.p;
    plan.s = grid.s;
    plan.H = grid.height();
    plan.W = grid.width();
    plan.nH = grid.nH;
    plan.nW = grid.nW;
    plan.gather.resize(static_cast<std::size_t>(plan.windows()) * plan.tokens());

    // mask ones in row-major order, as (sub-block, local coordinate) pairs
    std::vector<std::array<int, 4>> taps;
    taps.reserve(plan.tokens());
    for (int r = 0; r < m.side(); ++r)
        for (int c = 0; c < m.side(); ++c)
            if (m.bit(r, c))
                taps.push_back({r / m.p, c / m.p, r % m.p, c % m.p});
    if (static_cast<int>(taps.size()) != plan.tokens())
        throw std::invalid_argument("selection_indices: mask must carry exactly p^2 ones");

    for (int i = 0; i < grid.nH; ++i)
        for (int j = 0; j < grid.nW; ++j) {
            std::int32_t* g =
                plan.gather.data() + (static_cast<std::size_t>(i) * grid.nW + j) * plan.tokens();
            for (int t = 0; t < plan.tokens(); ++t) {
                const auto [a, b, x, y] = taps[static_cast<std::size_t>(t)];
                const int py = ((i + a) % grid.nH) * grid.p + x;
                const int px = ((j + b) % grid.nW) * grid.p + y;
                g[t] = static_cast<std::int32_t>(py) * plan.W + px;
            }
        }
    return plan;
}

Tensor gather_windows(const Tensor& x, const IndexPlan& plan) {
    const Shape in = x.shape;
    if (in.h != plan.H || in.w != plan.W)
        throw std::invalid_argument("gather_windows: tensor " + in.str() + " does not match plan " +
                                    std::to_string(plan.H) + "x" + std::to_string(plan.W));
    Tensor out({in.n * plan.windows(), in.c, plan.p, plan.p});
    const std::int64_t total = static_cast<std::int64_t>(in.n) * plan.windows();
#pragma omp parallel for schedule(static)
    for (std::int64_t wi = 0; wi < total; ++wi) {
        const int n = static_cast<int>(wi / plan.windows());
        const std::int32_t* g =
            plan.gather.data() + static_cast<std::size_t>(wi % plan.windows()) * plan.tokens();
        for (int c = 0; c < in.c; ++c) {
            const float* ip = x.plane(n, c);
            float* op = out.plane(static_cast<int>(wi), c);
            for (int t = 0; t < plan.tokens(); ++t)
                op[t] = ip[g[t]];
        }
    }
    return out;
}

Tensor scatter_windows(const Tensor& tokens, const IndexPlan& plan, int batch) {
    const Shape in = tokens.shape;
    if (in.n != batch * plan.windows() || in.h * in.w != plan.tokens())
        throw std::invalid_argument("scatter_windows: token tensor " + in.str() +
                                    " does not match plan");
    Tensor out({batch, in.c, plan.H, plan.W});
    const std::int64_t planes = static_cast<std::int64_t>(batch) * in.c;
#pragma omp parallel for schedule(static)
    for (std::int64_t pl = 0; pl < planes; ++pl) {
        const int n = static_cast<int>(pl / in.c);
        const int c = static_cast<int>(pl % in.c);
        float* op = out.plane(n, c);
        for (int w = 0; w < plan.windows(); ++w) {
            const std::int32_t* g = plan.gather.data() + static_cast<std::size_t>(w) * plan.tokens();
            const float* ip = tokens.plane(n * plan.windows() + w, c);
            for (int t = 0; t < plan.tokens(); ++t)
                op[g[t]] = ip[t];
        }
    }
    return out;
}

std::string mask_to_text(const Mask& m) {
    std::string out = std::to_string(m.p) + " " + std::to_string(m.s) + "\n";
    for (int r = 0; r < m.side(); ++r) {
        for (int c = 0; c < m.side(); ++c)
            out += m.bit(r, c) ? '1' : '0';
        out += '\n';
    }
    return out;
}

Mask mask_from_text(const std::string& text) {
    std::istringstream in(text);
    int p = 0, s = 0;
    if (!(in >> p >> s) || p < 1 || s < 1)
        throw std::invalid_argument("mask parse: expected header line \"p s\"");
    Mask m{p, s, std::vector<std::uint8_t>(static_cast<std::size_t>(s * p) * (s * p), 0)};
    std::string line;
    std::getline(in, line); // rest of header line
    for (int r = 0; r < m.side(); ++r) {
        if (!std::getline(in, line) || static_cast<int>(line.size()) < m.side())
            throw std::invalid_argument("mask parse: expected " + std::to_string(m.side()) +
                                        " rows of " + std::to_string(m.side()) + " digits");
        for (int c = 0; c < m.side(); ++c) {
            if (line[c] != '0' && line[c] != '1')
                throw std::invalid_argument("mask parse: row " + std::to_string(r) +
                                            " holds a character outside {0,1}");
            m.bits[static_cast<std::size_t>(r) * m.side() + c] = line[c] == '1';
        }
    }
    return m;
}

void save_mask(const std::string& path, const Mask& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << mask_to_text(m);
}

Mask load_mask(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return mask_from_text(ss.str());
}

} // namespace lipt
