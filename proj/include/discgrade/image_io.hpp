#pragma once

#include "discgrade/types.hpp"

namespace discgrade {

// 16-bit binary PGM (P5, maxval 65535, big-endian samples). The raw slice
// format emitted by the phantom generator and accepted at ingestion.
void write_pgm16(const fs::path& path, const SliceImage& img);
SliceImage read_pgm16(const fs::path& path);

/// Reads only the header; returns (height, width). Used by manifest
/// validation to bounds-check coordinates without loading pixels.
std::pair<int, int> read_pgm16_dims(const fs::path& path);

// 8-bit grayscale PNG (lossless), the export format for ROI patches.
void write_png_gray8(const fs::path& path, const ImageU8& img);
ImageU8 read_png_gray8(const fs::path& path);

// 8-bit RGB PNG, used by the report plots. Pixels are interleaved r,g,b.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // size height*width*3

  RgbImage() = default;
  RgbImage(int h, int w, std::uint8_t fill = 255)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}
};

void write_png_rgb8(const fs::path& path, const RgbImage& img);

}  // namespace discgrade
