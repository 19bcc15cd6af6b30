// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipt {

// Interleaved 8-bit RGB, row-major.
struct ImageRGB8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // 3 * width * height
};

// Binary PPM ("P6"), maxval 255 only. Comments allowed in the header.
ImageRGB8 load_ppm(const std::string& path);
void save_ppm(const std::string& path, const ImageRGB8& img);

// BT.601 digital luma from full-range 8-bit RGB:
// Y = 16 + 65.481 R' + 128.553 G' + 24.966 B', R'/G'/B' in [0,1].
// Output is (1,1,h,w) with values in [16, 235].
Tensor rgb_to_y(const ImageRGB8& img);

// (1,3,h,w) in [0,1] <-> 8-bit; tensor_to_image rounds half up and clamps.
Tensor image_to_tensor(const ImageRGB8& img);
ImageRGB8 tensor_to_image(const Tensor& t);

} // namespace lipt
