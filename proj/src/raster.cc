// SPDX-License-Identifier: Apache-2.0
#include "nvs/raster.h"

#include <cmath>
#include <limits>

namespace nvs {

ColorImage ColorImage::from_pixels(int width, int height, std::vector<Rgb> pixels) {
  if (width < 0 || height < 0 || pixels.size() != static_cast<size_t>(width) * height) {
    throw std::invalid_argument("ColorImage::from_pixels: pixel count does not match size");
  }
  ColorImage img;
  img.width_ = width;
  img.height_ = height;
  for (Rgb& p : pixels) {
    if (!std::isfinite(p.r) || !std::isfinite(p.g) || !std::isfinite(p.b)) {
      throw std::invalid_argument("ColorImage::from_pixels: non-finite channel");
    }
    p = p.clamped();
  }
  img.data_ = std::move(pixels);
  return img;
}

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::kDepth: return "depth";
    case MapKind::kMask: return "mask";
    case MapKind::kWeight: return "weight";
    case MapKind::kAlpha: return "alpha";
  }
  return "unknown";
}

namespace {

struct BilinearTaps {
  int x0, x1, y0, y1;
  float wx0, wx1, wy0, wy1;
};

// Taps for (u, v) in continuous pixel coordinates; std::nullopt outside
// [0, w] x [0, h]. Neighbors are clamped to the image.
std::optional<BilinearTaps> bilinear_taps(int width, int height, double u, double v) {
  if (!(u >= 0.0 && v >= 0.0 && u <= width && v <= height)) return std::nullopt;
  const double x = u - 0.5;
  const double y = v - 0.5;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const float ax = static_cast<float>(x - fx0);
  const float ay = static_cast<float>(y - fy0);
  const int ix = static_cast<int>(fx0);
  const int iy = static_cast<int>(fy0);
  BilinearTaps t;
  t.x0 = std::clamp(ix, 0, width - 1);
  t.x1 = std::clamp(ix + 1, 0, width - 1);
  t.y0 = std::clamp(iy, 0, height - 1);
  t.y1 = std::clamp(iy + 1, 0, height - 1);
  t.wx0 = 1.0f - ax;
  t.wx1 = ax;
  t.wy0 = 1.0f - ay;
  t.wy1 = ay;
  return t;
}

}  // namespace

std::optional<float> sample_bilinear(const ScalarMap& map, double u, double v) {
  if (map.empty()) return std::nullopt;
  const auto taps = bilinear_taps(map.width(), map.height(), u, v);
  if (!taps) return std::nullopt;
  const BilinearTaps& t = *taps;
  const float v00 = map.at(t.x0, t.y0);
  const float v10 = map.at(t.x1, t.y0);
  const float v01 = map.at(t.x0, t.y1);
  const float v11 = map.at(t.x1, t.y1);
  if (map.is_depth()) {
    // Neighbors that carry zero weight do not participate.
    if ((t.wx0 > 0 && t.wy0 > 0 && !valid_depth(v00)) ||
        (t.wx1 > 0 && t.wy0 > 0 && !valid_depth(v10)) ||
        (t.wx0 > 0 && t.wy1 > 0 && !valid_depth(v01)) ||
        (t.wx1 > 0 && t.wy1 > 0 && !valid_depth(v11))) {
      return std::nullopt;
    }
  }
  float acc = 0.0f;
  if (t.wy0 > 0) {
    if (t.wx0 > 0) acc += t.wx0 * t.wy0 * v00;
    if (t.wx1 > 0) acc += t.wx1 * t.wy0 * v10;
  }
  if (t.wy1 > 0) {
    if (t.wx0 > 0) acc += t.wx0 * t.wy1 * v01;
    if (t.wx1 > 0) acc += t.wx1 * t.wy1 * v11;
  }
  return acc;
}

std::optional<float> sample_depth(const ScalarMap& depth, double u, double v, float max_range) {
  if (depth.empty()) return std::nullopt;
  const auto taps = bilinear_taps(depth.width(), depth.height(), u, v);
  if (!taps) return std::nullopt;
  const BilinearTaps& t = *taps;
  const int xs[2] = {t.x0, t.x1};
  const int ys[2] = {t.y0, t.y1};
  const float wx[2] = {t.wx0, t.wx1};
  const float wy[2] = {t.wy0, t.wy1};
  float lo = std::numeric_limits<float>::infinity();
  float hi = -lo;
  float acc = 0.0f;
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      if (!(wx[i] > 0 && wy[j] > 0)) continue;
      const float d = depth.at(xs[i], ys[j]);
      if (!valid_depth(d)) return std::nullopt;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      acc += wx[i] * wy[j] * d;
    }
  }
  if (hi - lo > max_range) return std::nullopt;
  return acc;
}

std::optional<Rgb> sample_bilinear(const ColorImage& img, double u, double v) {
  if (img.empty()) return std::nullopt;
  const auto taps = bilinear_taps(img.width(), img.height(), u, v);
  if (!taps) return std::nullopt;
  const BilinearTaps& t = *taps;
  return (img.at(t.x0, t.y0) * t.wx0 + img.at(t.x1, t.y0) * t.wx1) * t.wy0 +
         (img.at(t.x0, t.y1) * t.wx0 + img.at(t.x1, t.y1) * t.wx1) * t.wy1;
}

ScalarMap downscale_quarter(const ScalarMap& map) {
  const int ow = (map.width() + 3) / 4;
  const int oh = (map.height() + 3) / 4;
  ScalarMap out(ow, oh, map.kind());
  const bool depth = map.is_depth();
#pragma omp parallel for schedule(static)
  for (int by = 0; by < oh; ++by) {
    for (int bx = 0; bx < ow; ++bx) {
      double sum = 0.0;
      int count = 0;
      for (int y = 4 * by; y < std::min(4 * by + 4, map.height()); ++y) {
        for (int x = 4 * bx; x < std::min(4 * bx + 4, map.width()); ++x) {
          const float value = map.at(x, y);
          if (depth && !valid_depth(value)) continue;
          sum += value;
          ++count;
        }
      }
      out.at(bx, by) = count > 0 ? static_cast<float>(sum / count) : kInvalidDepth;
    }
  }
  return out;
}

ColorImage downscale_quarter(const ColorImage& img) {
  const int ow = (img.width() + 3) / 4;
  const int oh = (img.height() + 3) / 4;
  ColorImage out(ow, oh);
#pragma omp parallel for schedule(static)
  for (int by = 0; by < oh; ++by) {
    for (int bx = 0; bx < ow; ++bx) {
      double r = 0.0, g = 0.0, b = 0.0;
      int count = 0;
      for (int y = 4 * by; y < std::min(4 * by + 4, img.height()); ++y) {
        for (int x = 4 * bx; x < std::min(4 * bx + 4, img.width()); ++x) {
          const Rgb& p = img.at(x, y);
          r += p.r;
          g += p.g;
          b += p.b;
          ++count;
        }
      }
      out.at(bx, by) = Rgb{static_cast<float>(r / count), static_cast<float>(g / count),
                           static_cast<float>(b / count)}
                           .clamped();
    }
  }
  return out;
}

ScalarMap maxpool3(const ScalarMap& map) {
  ScalarMap out(map.width(), map.height(), map.kind());
  const int w = map.width();
  const int h = map.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float best = map.at(x, y);
      for (int yy = std::max(y - 1, 0); yy <= std::min(y + 1, h - 1); ++yy) {
        for (int xx = std::max(x - 1, 0); xx <= std::min(x + 1, w - 1); ++xx) {
          best = std::max(best, map.at(xx, yy));
        }
      }
      out.at(x, y) = best;
    }
  }
  return out;
}

ScalarMap upscale_bilinear(const ScalarMap& map, int target_width, int target_height) {
  if (map.empty()) throw std::invalid_argument("upscale_bilinear: empty input");
  if (target_width <= 0 || target_height <= 0) {
    throw std::invalid_argument("upscale_bilinear: target size must be positive");
  }
  ScalarMap out(target_width, target_height, map.kind());
  const double sx = static_cast<double>(map.width()) / target_width;
  const double sy = static_cast<double>(map.height()) / target_height;
  const int w = map.width();
  const int h = map.height();
#pragma omp parallel for schedule(static)
  for (int y = 0; y < target_height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const float ay = static_cast<float>(fy - y0);
    const int ya = std::clamp(y0, 0, h - 1);
    const int yb = std::clamp(y0 + 1, 0, h - 1);
    for (int x = 0; x < target_width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const float ax = static_cast<float>(fx - x0);
      const int xa = std::clamp(x0, 0, w - 1);
      const int xb = std::clamp(x0 + 1, 0, w - 1);
      const float top = map.at(xa, ya) * (1.0f - ax) + map.at(xb, ya) * ax;
      const float bottom = map.at(xa, yb) * (1.0f - ax) + map.at(xb, yb) * ax;
      out.at(x, y) = top * (1.0f - ay) + bottom * ay;
    }
  }
  return out;
}

NormalMap normals_from_depth(const ScalarMap& depth, const Camera& cam) {
  if (!depth.is_depth()) {
    throw std::invalid_argument("normals_from_depth: input is a " + to_string(depth.kind()) +
                                " map, not depth");
  }
  const int w = depth.width();
  const int h = depth.height();
  NormalMap out(w, h);
  const Vec3 center = cam.center();
  auto point = [&](int x, int y) { return unproject(x + 0.5, y + 0.5, depth.at(x, y), cam); };
#pragma omp parallel for schedule(static)
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (!valid_depth(depth.at(x, y)) || !valid_depth(depth.at(x - 1, y)) ||
          !valid_depth(depth.at(x + 1, y)) || !valid_depth(depth.at(x, y - 1)) ||
          !valid_depth(depth.at(x, y + 1))) {
        continue;
      }
      const Vec3 tx = point(x + 1, y) - point(x - 1, y);
      const Vec3 ty = point(x, y + 1) - point(x, y - 1);
      Vec3 n = tx.cross(ty);
      const double len = n.norm();
      if (!(len > 0.0)) continue;
      n /= len;
      if (n.dot(point(x, y) - center) > 0.0) n = -n;
      out.at(x, y) = n.cast<float>();
    }
  }
  return out;
}

}  // namespace nvs
