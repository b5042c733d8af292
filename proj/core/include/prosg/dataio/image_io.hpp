// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace prosg::dataio {

/// Interleaved float image, row-major, values nominally in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  int channels = 3;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::size_t pixels() const { return static_cast<std::size_t>(width) * height; }
  bool operator==(const Image&) const = default;
};

/// 8-bit PNG as grey, RGB or RGBA (1, 3 or 4 channels). Throws LoadError naming the path.
Image read_png(const std::filesystem::path& path, int channels = 3);
Image decode_png(const std::vector<std::uint8_t>& bytes, int channels = 3);
/// Values are clamped to [0, 1] and rounded to 8 bits. 1, 3 or 4 channels.
void write_png(const std::filesystem::path& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Little-endian PFM ("PF" colour or "Pf" grey), rows stored bottom-up.
void write_pfm(const std::filesystem::path& path, const Image& image);
Image read_pfm(const std::filesystem::path& path);

}  // namespace prosg::dataio
