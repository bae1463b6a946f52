#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "strlab/errors.hpp"

namespace strlab {

/// Native stimulus canvas size before any model-specific resizing.
constexpr int kCanvasWidth = 100;
constexpr int kCanvasHeight = 11;

/// Grayscale raster, row-major, 0 = black background, 255 = white ink.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {}

  uint8_t& at(int row, int col) { return pixels[static_cast<size_t>(row) * width + col]; }
  uint8_t at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }

  bool operator==(const Image& o) const {
    return width == o.width && height == o.height && pixels == o.pixels;
  }
};

/// Binary PGM (P5, maxval 255).
void write_pgm(const Image& img, const std::string& path);
Image read_pgm(const std::string& path);

/// Bilinear resample to exactly (w, h); aspect is not preserved. Uses
/// half-pixel center alignment, so resizing to the same dims is identity.
Image resize_bilinear(const Image& img, int w, int h);

}  // namespace strlab
