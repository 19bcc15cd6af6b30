// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/tensor.hpp"

namespace lipt {

// Non-overlapping p x p window geometry over an H x W image, with expansion
// factor s. Requires H, W multiples of p and p <= s*p <= min(H, W).
struct WindowGrid {
    int p = 0;
    int s = 1;
    int nH = 0;
    int nW = 0;

    static WindowGrid make(int H, int W, int p, int s);
    int height() const { return nH * p; }
    int width() const { return nW * p; }
    int windows() const { return nH * nW; }
};

// (n*nH*nW, c, p, p); window (i, j) of batch item n sits at index
// n*nH*nW + i*nW + j.
struct WindowedTensor {
    Tensor t;
    int batch = 0;
    WindowGrid grid;
};

// (n*nH*nW, c, s*p, s*p); sub-block (a, b) of expanded window (i, j) holds
// original window ((i+a) mod nH, (j+b) mod nW). The circular wrap realizes
// padding with the top/leftmost windows for the outermost bottom/right rows.
struct ExpandedWindows {
    Tensor t;
    int batch = 0;
    WindowGrid grid;
};

WindowedTensor window_partition(const Tensor& x, const WindowGrid& grid);
Tensor window_merge(const WindowedTensor& windows);
ExpandedWindows window_expand(const WindowedTensor& windows);

} // namespace lipt
