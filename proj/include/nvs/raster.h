// SPDX-License-Identifier: Apache-2.0
//
// Dense row-major rasters and the resampling kernels used across the
// pipeline. Depth maps use 0.0 as the invalid sentinel; every kernel that
// reads depth treats it explicitly.
#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nvs/camgeom.h"

namespace nvs {

inline constexpr float kInvalidDepth = 0.0f;

inline bool valid_depth(float d) { return d > 0.0f; }

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;

  Rgb& operator+=(const Rgb& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
  friend Rgb operator+(Rgb a, const Rgb& b) { return a += b; }
  friend Rgb operator*(Rgb a, float s) { return {a.r * s, a.g * s, a.b * s}; }
  friend Rgb operator*(float s, Rgb a) { return a * s; }
  friend bool operator==(const Rgb&, const Rgb&) = default;

  float mean() const { return (r + g + b) * (1.0f / 3.0f); }
  Rgb clamped() const {
    return {std::clamp(r, 0.0f, 1.0f), std::clamp(g, 0.0f, 1.0f), std::clamp(b, 0.0f, 1.0f)};
  }
};

template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative raster size");
    data_.assign(static_cast<size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  const T& at(int x, int y) const {
    assert(in_bounds(x, y));
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  template <typename U>
  bool same_size(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 protected:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// RGB image with channels in [0, 1].
class ColorImage : public Grid<Rgb> {
 public:
  ColorImage() = default;
  ColorImage(int width, int height, Rgb fill = {}) : Grid(width, height, fill.clamped()) {}

  // Clamps every channel to [0, 1]; throws on non-finite values.
  static ColorImage from_pixels(int width, int height, std::vector<Rgb> pixels);
};

enum class MapKind { kDepth, kMask, kWeight, kAlpha };

std::string to_string(MapKind kind);

class ScalarMap : public Grid<float> {
 public:
  ScalarMap() = default;
  ScalarMap(int width, int height, MapKind kind, float fill = 0.0f)
      : Grid(width, height, fill), kind_(kind) {}

  MapKind kind() const { return kind_; }
  bool is_depth() const { return kind_ == MapKind::kDepth; }

  friend bool operator==(const ScalarMap&, const ScalarMap&) = default;

 private:
  MapKind kind_ = MapKind::kDepth;
};

// World-space unit normals; the zero vector marks an invalid pixel.
class NormalMap : public Grid<Eigen::Vector3f> {
 public:
  NormalMap() = default;
  NormalMap(int width, int height) : Grid(width, height, Eigen::Vector3f::Zero()) {}
  bool valid(int x, int y) const { return !at(x, y).isZero(); }
};

// Throws std::invalid_argument naming `what` when sizes differ.
template <typename A, typename B>
void require_same_size(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (!a.same_size(b)) {
    throw std::invalid_argument(std::string(what) + ": raster size mismatch (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

// Bilinear interpolation at continuous pixel coordinates (u, v). Returns
// std::nullopt outside [0, width] x [0, height] and, for depth maps, when a
// neighbor with nonzero interpolation weight holds the invalid sentinel.
std::optional<float> sample_bilinear(const ScalarMap& map, double u, double v);
std::optional<Rgb> sample_bilinear(const ColorImage& img, double u, double v);

// Depth-map sample_bilinear that also gives up across depth discontinuities:
// std::nullopt when the participating neighbors span more than `max_range`
// meters, so no surface is interpolated between foreground and background.
std::optional<float> sample_depth(const ScalarMap& depth, double u, double v, float max_range);

// 4x4 box average to (ceil(w/4), ceil(h/4)); edge blocks average the pixels
// they contain. Depth maps average valid pixels only (sentinel if none).
ScalarMap downscale_quarter(const ScalarMap& map);
ColorImage downscale_quarter(const ColorImage& img);

// 3x3 maximum with clamped edges.
ScalarMap maxpool3(const ScalarMap& map);

// Bilinear magnification with half-pixel-center alignment and clamped edges.
ScalarMap upscale_bilinear(const ScalarMap& map, int target_width, int target_height);

// Central-difference normals of the unprojected depth, oriented toward the
// camera. Border pixels and pixels touching invalid depth are invalid.
NormalMap normals_from_depth(const ScalarMap& depth, const Camera& cam);

}  // namespace nvs
