// SPDX-License-Identifier: Apache-2.0
#include "lipt/image_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lipt {

// Next header token, skipping whitespace and '#' comments.
static std::string ppm_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

ImageRGB8 load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    if (ppm_token(in) != "P6")
        throw std::runtime_error(path + ": not a binary PPM (expected \"P6\")");
    ImageRGB8 img;
    int maxval = 0;
    try {
        img.width = std::stoi(ppm_token(in));
        img.height = std::stoi(ppm_token(in));
        maxval = std::stoi(ppm_token(in));
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": malformed PPM header");
    }
    if (img.width < 1 || img.height < 1)
        throw std::runtime_error(path + ": bad PPM dimensions");
    if (maxval != 255)
        throw std::runtime_error(path + ": unsupported maxval " + std::to_string(maxval) +
                                 " (only 255)");
    // ppm_token consumed exactly one whitespace byte after maxval
    img.pixels.resize(static_cast<std::size_t>(3) * img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw std::runtime_error(path + ": truncated PPM payload");
    return img;
}

void save_ppm(const std::string& path, const ImageRGB8& img) {
    if (img.pixels.size() != static_cast<std::size_t>(3) * img.width * img.height)
        throw std::invalid_argument("save_ppm: pixel buffer does not match dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out)
        throw std::runtime_error("short write to " + path);
}

Tensor rgb_to_y(const ImageRGB8& img) {
    Tensor y({1, 1, img.height, img.width});
    for (std::size_t i = 0; i < y.size(); ++i) {
        const std::uint8_t* px = img.pixels.data() + 3 * i;
        const double r = px[0] / 255.0, g = px[1] / 255.0, b = px[2] / 255.0;
        y.data[i] = static_cast<float>(16.0 + 65.481 * r + 128.553 * g + 24.966 * b);
    }
    return y;
}

Tensor image_to_tensor(const ImageRGB8& img) {
    Tensor t({1, 3, img.height, img.width});
    const std::size_t hw = static_cast<std::size_t>(img.height) * img.width;
    for (std::size_t i = 0; i < hw; ++i)
        for (int c = 0; c < 3; ++c)
            t.data[static_cast<std::size_t>(c) * hw + i] = img.pixels[3 * i + c] / 255.0f;
    return t;
}

ImageRGB8 tensor_to_image(const Tensor& t) {
    if (t.shape.n != 1 || t.shape.c != 3)
        throw std::invalid_argument("tensor_to_image: expected (1,3,h,w), got " + t.shape.str());
    ImageRGB8 img;
    img.width = t.shape.w;
    img.height = t.shape.h;
    const std::size_t hw = static_cast<std::size_t>(img.height) * img.width;
    img.pixels.resize(3 * hw);
    for (std::size_t i = 0; i < hw; ++i)
        for (int c = 0; c < 3; ++c) {
            const double v = std::floor(t.data[static_cast<std::size_t>(c) * hw + i] * 255.0 + 0.5);
            img.pixels[3 * i + c] =
                static_cast<std::uint8_t>(v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v));
        }
    return img;
}

} // namespace lipt
