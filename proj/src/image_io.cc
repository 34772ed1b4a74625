// SPDX-License-Identifier: Apache-2.0
#include "nvs/image_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace nvs {

namespace {

using File = std::unique_ptr<FILE, int (*)(FILE*)>;

File open_file(const std::filesystem::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3 after transforms
  int bit_depth = 8;
  std::vector<uint8_t> data;
};

// Decodes to 8-bit (or 16-bit big-endian when keep16) gray or RGB.
DecodedPng decode_png(const std::filesystem::path& path, bool keep16) {
  File f = open_file(path, "rb");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  DecodedPng out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error(path.string() + ": " + (error.empty() ? "PNG decode error" : error));
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (!keep16 && depth == 16) png_set_strip_16(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.data.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

uint8_t quantize(float v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

}  // namespace

ColorImage read_png(const std::filesystem::path& path) {
  const DecodedPng d = decode_png(path, false);
  if (d.channels != 1 && d.channels != 3) {
    throw std::runtime_error(path.string() + ": unsupported PNG channel layout");
  }
  std::vector<Rgb> px(static_cast<size_t>(d.width) * d.height);
  for (size_t i = 0; i < px.size(); ++i) {
    if (d.channels == 1) {
      const float g = d.data[i] / 255.0f;
      px[i] = {g, g, g};
    } else {
      px[i] = {d.data[3 * i] / 255.0f, d.data[3 * i + 1] / 255.0f, d.data[3 * i + 2] / 255.0f};
    }
  }
  return ColorImage::from_pixels(d.width, d.height, std::move(px));
}

void write_png(const std::filesystem::path& path, const ColorImage& img) {
  if (img.empty()) throw std::invalid_argument("write_png: empty image");
  File f = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw std::runtime_error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  std::vector<uint8_t> data(img.size() * 3);
  for (size_t i = 0; i < img.size(); ++i) {
    data[3 * i] = quantize(img[i].r);
    data[3 * i + 1] = quantize(img[i].g);
    data[3 * i + 2] = quantize(img[i].b);
  }
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = data.data() + static_cast<size_t>(y) * img.width() * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(path.string() + ": " + (error.empty() ? "PNG encode error" : error));
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) throw std::runtime_error("write failed: " + path.string());
}

ScalarMap read_png_depth(const std::filesystem::path& path, double meters_per_unit) {
  if (!(meters_per_unit > 0.0)) throw std::invalid_argument("meters_per_unit must be positive");
  const DecodedPng d = decode_png(path, true);
  if (d.channels != 1 || d.bit_depth != 16) {
    throw std::runtime_error(path.string() + ": expected a 16-bit single-channel PNG");
  }
  ScalarMap out(d.width, d.height, MapKind::kDepth);
  for (size_t i = 0; i < out.size(); ++i) {
    const unsigned raw = (static_cast<unsigned>(d.data[2 * i]) << 8) | d.data[2 * i + 1];
    out[i] = raw == 0 ? kInvalidDepth : static_cast<float>(raw * meters_per_unit);
  }
  return out;
}

ScalarMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  int width = 0, height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in || magic != "Pf") {
    throw std::runtime_error(path.string() + ": not a single-channel PFM file");
  }
  if (width <= 0 || height <= 0 || scale == 0.0) {
    throw std::runtime_error(path.string() + ": bad PFM header");
  }
  in.get();  // the single whitespace byte ending the header
  const bool little = scale < 0.0;
  ScalarMap out(width, height, MapKind::kDepth);
  std::vector<uint32_t> row(width);
  for (int r = 0; r < height; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(width * 4));
    if (!in) throw std::runtime_error(path.string() + ": truncated PFM data");
    const int y = height - 1 - r;
    for (int x = 0; x < width; ++x) {
      uint32_t bits = row[x];
      if (little != (std::endian::native == std::endian::little)) bits = __builtin_bswap32(bits);
      out.at(x, y) = std::bit_cast<float>(bits);
    }
  }
  return out;
}

void write_pfm(const std::filesystem::path& path, const ScalarMap& map) {
  if (map.empty()) throw std::invalid_argument("write_pfm: empty map");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "Pf\n" << map.width() << ' ' << map.height() << "\n-1.0\n";
  std::vector<uint32_t> row(map.width());
  for (int y = map.height() - 1; y >= 0; --y) {
    for (int x = 0; x < map.width(); ++x) {
      uint32_t bits = std::bit_cast<uint32_t>(map.at(x, y));
      if constexpr (std::endian::native != std::endian::little) bits = __builtin_bswap32(bits);
      row[x] = bits;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace nvs
