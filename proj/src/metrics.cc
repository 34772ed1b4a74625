// SPDX-License-Identifier: Apache-2.0
#include "nvs/metrics.h"

#include <array>
#include <cmath>
#include <stdexcept>

namespace nvs {

namespace {

void check_pair(const ColorImage& a, const ColorImage& b, const char* what) {
  require_same_size(a, b, what);
  if (a.empty()) throw std::invalid_argument(std::string(what) + ": empty image");
}

float channel(const Rgb& p, int c) { return c == 0 ? p.r : (c == 1 ? p.g : p.b); }

constexpr int kRadius = 5;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, 2 * kRadius + 1> gaussian_taps() {
  std::array<double, 2 * kRadius + 1> g{};
  for (int i = -kRadius; i <= kRadius; ++i) g[i + kRadius] = std::exp(-(i * i) / (2 * kSigma * kSigma));
  return g;
}

double ssim_channel(const ColorImage& a, const ColorImage& b, int c) {
  static const auto g = gaussian_taps();
  const int w = a.width();
  const int h = a.height();
  double total = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double wsum = 0.0, ma = 0.0, mb = 0.0;
      for (int dy = -kRadius; dy <= kRadius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const double wt = g[dy + kRadius] * g[dx + kRadius];
          wsum += wt;
          ma += wt * channel(a.at(xx, yy), c);
          mb += wt * channel(b.at(xx, yy), c);
        }
      }
      ma /= wsum;
      mb /= wsum;
      // Second pass around the means keeps constant windows at exactly zero variance.
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int dy = -kRadius; dy <= kRadius; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -kRadius; dx <= kRadius; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          const double wt = g[dy + kRadius] * g[dx + kRadius];
          const double da = channel(a.at(xx, yy), c) - ma;
          const double db = channel(b.at(xx, yy), c) - mb;
          va += wt * da * da;
          vb += wt * db * db;
          cov += wt * da * db;
        }
      }
      va /= wsum;
      vb /= wsum;
      cov /= wsum;
      total += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    }
  }
  return total / (static_cast<double>(w) * h);
}

ColorImage abs_diff(const ColorImage& a, const ColorImage& b) {
  ColorImage out(a.width(), a.height());
  for (size_t i = 0; i < a.size(); ++i) {
    out[i] = {std::fabs(a[i].r - b[i].r), std::fabs(a[i].g - b[i].g), std::fabs(a[i].b - b[i].b)};
  }
  return out;
}

void check_sequences(std::span<const ColorImage> rendered, std::span<const ColorImage> gt,
                     const char* what) {
  if (rendered.size() != gt.size()) {
    throw std::invalid_argument(std::string(what) + ": sequences differ in length");
  }
  for (size_t t = 0; t < rendered.size(); ++t) check_pair(rendered[t], gt[t], what);
}

}  // namespace

double psnr(const ColorImage& a, const ColorImage& b) {
  check_pair(a, b, "psnr");
  double se = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double d = static_cast<double>(channel(a[i], c)) - channel(b[i], c);
      se += d * d;
    }
  }
  const double mse = se / (3.0 * static_cast<double>(a.size()));
  if (mse <= 0.0) return kPsnrCap;
  return std::min(10.0 * std::log10(1.0 / mse), kPsnrCap);
}

double ssim(const ColorImage& a, const ColorImage& b) {
  check_pair(a, b, "ssim");
  return (ssim_channel(a, b, 0) + ssim_channel(a, b, 1) + ssim_channel(a, b, 2)) / 3.0;
}

double l1(const ColorImage& a, const ColorImage& b) {
  check_pair(a, b, "l1");
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      sum += std::fabs(static_cast<double>(channel(a[i], c)) - channel(b[i], c));
    }
  }
  return 255.0 * sum / (3.0 * static_cast<double>(a.size()));
}

double tcc(std::span<const ColorImage> rendered, std::span<const ColorImage> gt) {
  check_sequences(rendered, gt, "tcc");
  if (rendered.size() < 2) throw std::invalid_argument("tcc: need at least two frames");
  double sum = 0.0;
  for (size_t t = 0; t + 1 < rendered.size(); ++t) {
    sum += ssim(abs_diff(rendered[t], rendered[t + 1]), abs_diff(gt[t], gt[t + 1]));
  }
  return sum / static_cast<double>(rendered.size() - 1);
}

double population_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

double sdt(std::span<const ColorImage> rendered, std::span<const ColorImage> gt) {
  check_sequences(rendered, gt, "sdt");
  std::vector<double> errors;
  errors.reserve(rendered.size());
  for (size_t t = 0; t < rendered.size(); ++t) errors.push_back(l1(rendered[t], gt[t]));
  return population_std(errors);
}

double sdv(std::span<const double> per_view_l1) { return population_std(per_view_l1); }

double depth_l1(const ScalarMap& a, const ScalarMap& b) {
  require_same_size(a, b, "depth_l1");
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!valid_depth(a[i]) || !valid_depth(b[i])) continue;
    sum += std::fabs(static_cast<double>(a[i]) - b[i]);
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace nvs
