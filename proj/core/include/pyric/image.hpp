// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pyric {

struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels; // 3 * width * height, row-major

  ImageRGB(int w, int h)
      : width(w), height(h),
        pixels(static_cast<std::size_t>(3) * w * h, 0) {}

  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
};

/// Minimal deterministic PNG encoder (8-bit RGB, zlib level 6, no
/// filtering). Same pixels always produce the same bytes.
void write_png(const ImageRGB& image, const std::filesystem::path& path);

} // namespace pyric
