// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/tensor.hpp"
#include "lipt/windowing.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipt {

// Binary sp x sp sampling pattern. Attention masks carry exactly p*p ones;
// the verifier also accepts arbitrary patterns so volatile masks can be
// inspected.
struct Mask {
    int p = 0;
    int s = 0;
    std::vector<std::uint8_t> bits; // row-major, side = s*p

    int side() const { return s * p; }
    bool bit(int r, int c) const { return bits[static_cast<std::size_t>(r) * side() + c] != 0; }
    int ones() const;
};

// phi: local coordinate (x', y') in [0,p)^2 -> sub-block (a, b) in [0,s)^2,
// stored as a*s + b in row-major (x', y') order. Every assignment-induced
// mask samples each local coordinate from exactly one sub-block, so it is
// non-volatile by construction.
struct AssignmentMap {
    int p = 0;
    int s = 0;
    std::vector<int> target;

    int at(int x, int y) const { return target[static_cast<std::size_t>(x) * p + y]; }
};

Mask mask_from_assignment(const AssignmentMap& phi);

// phi(x', y') = (x' mod s, y' mod s): the spread pattern used for the sparse
// large-window path.
Mask sparse_mask(int p, int s);
// phi == (0, 0): dense p x p block at the top-left; selects the original
// window, equivalent to plain local window attention.
Mask dense_block_mask(int p, int s);
// Ones on the (r mod s == 0, c mod s == 0) lattice; volatile for s > 1.
Mask global_stride_mask(int p, int s);

// For each local coordinate (x', y'), how many sub-blocks (a, b) sample it.
// Row-major p x p counts.
std::vector<int> coverage_map(const Mask& m);

// Non-volatility drop rate: fraction of local coordinates no sub-block
// samples. 0 iff the mask loses nothing when stitched over expanded windows.
double beta(const Mask& m);
bool is_non_volatile(const Mask& m);

// Gather/scatter plan realizing masked expanded-window sampling. For each
// window (i, j), gather[win*p*p + t] is the flat H*W pixel index of the t-th
// mask one (row-major over ones). For an exactly-covering mask this is a
// permutation of all pixels.
struct IndexPlan {
    int p = 0, s = 0, H = 0, W = 0, nH = 0, nW = 0;
    std::vector<std::int32_t> gather;

    int windows() const { return nH * nW; }
    int tokens() const { return p * p; }
};

IndexPlan selection_indices(const Mask& m, const WindowGrid& grid);

// (n, c, H, W) -> (n * windows, c, p, p), tokens laid out row-major in the
// order the plan lists them.
Tensor gather_windows(const Tensor& x, const IndexPlan& plan);
// Exact inverse of gather_windows.
Tensor scatter_windows(const Tensor& tokens, const IndexPlan& plan, int batch);

// Text format: first line "p s", then s*p lines of s*p characters in {0,1}.
std::string mask_to_text(const Mask& m);
Mask mask_from_text(const std::string& text);
void save_mask(const std::string& path, const Mask& m);
Mask load_mask(const std::string& path);

} // namespace lipt
