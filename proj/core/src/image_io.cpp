// Copyright 2026 The ProSG Authors
// SPDX-License-Identifier: Apache-2.0

#include "prosg/dataio/image_io.hpp"

#include "prosg/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace prosg::dataio {
namespace {

png_uint_32 format_for(int channels) {
  switch (channels) {
    case 1:
      return PNG_FORMAT_GRAY;
    case 3:
      return PNG_FORMAT_RGB;
    case 4:
      return PNG_FORMAT_RGBA;
    default:
      throw InputError("PNG images need 1, 3 or 4 channels, got " + std::to_string(channels));
  }
}

std::vector<png_byte> quantize(const Image& image) {
  if (image.data.size() != image.pixels() * static_cast<std::size_t>(image.channels)) {
    throw ShapeError("image data does not match its declared size");
  }
  std::vector<png_byte> bytes(image.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const float v = std::clamp(image.data[i], 0.0f, 1.0f);
    bytes[i] = static_cast<png_byte>(std::lround(v * 255.0f));
  }
  return bytes;
}

}  // namespace

namespace {

Image finish_read(png_image& img, int channels, const std::string& what) {
  img.format = format_for(channels);
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw LoadError("cannot decode PNG " + what + ": " + img.message);
  }
  Image out(static_cast<int>(img.width), static_cast<int>(img.height), channels);
  for (std::size_t i = 0; i < buf.size(); ++i) out.data[i] = static_cast<float>(buf[i]) / 255.0f;
  return out;
}

}  // namespace

Image read_png(const std::filesystem::path& path, int channels) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw LoadError("cannot read PNG " + path.string() + ": " + img.message);
  }
  return finish_read(img, channels, path.string());
}

Image decode_png(const std::vector<std::uint8_t>& bytes, int channels) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw LoadError(std::string("cannot read in-memory PNG: ") + img.message);
  }
  return finish_read(img, channels, "buffer");
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const auto bytes = quantize(image);
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = format_for(image.channels);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw LoadError("cannot write PNG " + path.string() + ": " + img.message);
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  const auto bytes = quantize(image);
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = format_for(image.channels);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, bytes.data(), 0, nullptr)) {
    throw InputError(std::string("cannot encode PNG: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, bytes.data(), 0, nullptr)) {
    throw InputError(std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) throw InputError("PFM needs 1 or 3 channels");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write PFM " + path.string());
  out << (image.channels == 3 ? "PF" : "Pf") << "\n" << image.width << " " << image.height << "\n-1.0\n";
  const std::size_t row = static_cast<std::size_t>(image.width) * image.channels;
  for (int y = image.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(image.data.data() + static_cast<std::size_t>(y) * row),
              static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!out) throw LoadError("failed writing PFM " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read PFM " + path.string());
  std::string tag;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> tag >> w >> h >> scale;
  in.get();
  if ((tag != "PF" && tag != "Pf") || w <= 0 || h <= 0 || scale >= 0.0) {
    throw LoadError("unsupported PFM header in " + path.string());
  }
  Image img(w, h, tag == "PF" ? 3 : 1);
  const std::size_t row = static_cast<std::size_t>(w) * img.channels;
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(img.data.data() + static_cast<std::size_t>(y) * row),
            static_cast<std::streamsize>(row * sizeof(float)));
  }
  if (!in) throw LoadError("truncated PFM " + path.string());
  return img;
}

}  // namespace prosg::dataio
