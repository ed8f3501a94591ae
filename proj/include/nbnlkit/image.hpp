#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nbnlkit/error.hpp"

namespace nbnlkit {

/// Grayscale image, row-major float pixels in [0, 1]. Color inputs are
/// converted on load with Rec.601 luma weights.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;

  float at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  static GrayImage zeros(int width, int height) {
    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<std::size_t>(width) * height, 0.0f);
    return img;
  }
};

/// Aspect-preserving bilinear resize so the longer side equals `target`.
/// Images already at the target are returned unchanged.
GrayImage resize_longest_side(const GrayImage& image, int target = 200);

/// Bilinear resize to the exact output size (pixel-center aligned).
GrayImage resize_bilinear(const GrayImage& image, int out_width,
                          int out_height);

/// Copies the rectangle [x0, x0+w) x [y0, y0+h); must lie inside the image.
GrayImage crop(const GrayImage& image, int x0, int y0, int w, int h);

/// Loads PNG (8-bit gray/RGB/alpha, non-interlaced), PGM (P2/P5) or
/// PPM (P3/P6) by sniffing the file's magic bytes.
GrayImage load_image(const std::string& path);

/// Decodes an in-memory PNG byte stream.
GrayImage decode_png(const std::uint8_t* data, std::size_t size);

/// Decodes an in-memory PGM/PPM byte stream.
GrayImage decode_pnm(const std::uint8_t* data, std::size_t size);

/// Writes a binary 8-bit PGM (P5).
void write_pgm(const std::string& path, const GrayImage& image);

}  // namespace nbnlkit
