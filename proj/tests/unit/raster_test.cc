// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "nvs/raster.h"

namespace nvs {
namespace {

ScalarMap mask_from(int w, int h, auto f) {
  ScalarMap m(w, h, MapKind::kMask);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(x, y) = static_cast<float>(f(x, y));
  }
  return m;
}

ScalarMap random_mask(int w, int h, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0, 1);
  return mask_from(w, h, [&](int, int) { return u(rng); });
}

Camera axis_camera(int w, int h, double f) {
  Camera c;
  c.fx = c.fy = f;
  c.cx = 0.5 * w;
  c.cy = 0.5 * h;
  c.width = w;
  c.height = h;
  return c;
}

TEST(ColorImage, ClampsAndRejectsNonFinite) {
  const ColorImage img = ColorImage::from_pixels(2, 1, {{-0.5f, 0.5f, 1.5f}, {0.f, 1.f, 0.25f}});
  EXPECT_EQ(img.at(0, 0), (Rgb{0.f, 0.5f, 1.f}));
  EXPECT_THROW(ColorImage::from_pixels(1, 1, {{NAN, 0.f, 0.f}}), std::invalid_argument);
  EXPECT_THROW(ColorImage::from_pixels(2, 2, {{0.f, 0.f, 0.f}}), std::invalid_argument);
  EXPECT_EQ(ColorImage(1, 1, {2.f, -1.f, 0.5f}).at(0, 0), (Rgb{1.f, 0.f, 0.5f}));
}

TEST(SampleBilinear, PixelCenterIsExact) {
  const ScalarMap m = random_mask(7, 5, 1);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 7; ++x) {
      const auto s = sample_bilinear(m, x + 0.5, y + 0.5);
      ASSERT_TRUE(s);
      EXPECT_EQ(*s, m.at(x, y));
    }
  }
}

TEST(SampleBilinear, Midpoint) {
  ScalarMap d(2, 1, MapKind::kDepth);
  d.at(0, 0) = 1.0f;
  d.at(1, 0) = 3.0f;
  const auto s = sample_bilinear(d, 1.0, 0.5);
  ASSERT_TRUE(s);
  EXPECT_FLOAT_EQ(*s, 2.0f);
}

TEST(SampleBilinear, OutOfBounds) {
  const ScalarMap m = random_mask(4, 4, 2);
  EXPECT_FALSE(sample_bilinear(m, -5, 2));
  EXPECT_FALSE(sample_bilinear(m, 2, 4.01));
  EXPECT_TRUE(sample_bilinear(m, 0.0, 0.0));
  EXPECT_TRUE(sample_bilinear(m, 4.0, 4.0));
}

TEST(SampleBilinear, InvalidDepthNeighbor) {
  ScalarMap d(2, 2, MapKind::kDepth, 2.0f);
  d.at(1, 1) = kInvalidDepth;
  EXPECT_FALSE(sample_bilinear(d, 1.0, 1.0));
  // Zero weight on the invalid tap is fine.
  const auto s = sample_bilinear(d, 0.5, 0.5);
  ASSERT_TRUE(s);
  EXPECT_EQ(*s, 2.0f);
  // Masks have no sentinel.
  ScalarMap m(2, 2, MapKind::kMask, 1.0f);
  m.at(1, 1) = 0.0f;
  EXPECT_FLOAT_EQ(*sample_bilinear(m, 1.0, 1.0), 0.75f);
}

TEST(SampleBilinear, Color) {
  const ColorImage img = ColorImage::from_pixels(2, 1, {{1.f, 0.f, 0.f}, {0.f, 0.f, 1.f}});
  const auto s = sample_bilinear(img, 1.0, 0.5);
  ASSERT_TRUE(s);
  EXPECT_FLOAT_EQ(s->r, 0.5f);
  EXPECT_FLOAT_EQ(s->b, 0.5f);
}

TEST(SampleDepth, RejectsDiscontinuity) {
  ScalarMap d(2, 1, MapKind::kDepth);
  d.at(0, 0) = 1.0f;
  d.at(1, 0) = 1.05f;
  EXPECT_FALSE(sample_depth(d, 1.0, 0.5, 0.04f));
  const auto near = sample_depth(d, 1.0, 0.5, 0.08f);
  ASSERT_TRUE(near);
  EXPECT_FLOAT_EQ(*near, 1.025f);
  // Only taps with weight count: at the left center the far tap is ignored.
  const auto left = sample_depth(d, 0.5, 0.5, 0.04f);
  ASSERT_TRUE(left);
  EXPECT_EQ(*left, 1.0f);
}

TEST(SampleDepth, MatchesBilinearWhenSmooth) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 9), v(0, 7);
  const ScalarMap d = mask_from(9, 7, [](int x, int y) { return 2.0 + 0.01 * x - 0.005 * y; });
  ScalarMap depth(9, 7, MapKind::kDepth);
  for (size_t i = 0; i < d.size(); ++i) depth[i] = d[i];
  for (int i = 0; i < 500; ++i) {
    const double uu = u(rng), vv = v(rng);
    EXPECT_EQ(sample_depth(depth, uu, vv, INFINITY), sample_bilinear(depth, uu, vv));
  }
}

TEST(DownscaleQuarter, Constant) {
  const ScalarMap m(10, 9, MapKind::kMask, 0.3f);
  const ScalarMap q = downscale_quarter(m);
  EXPECT_EQ(q.width(), 3);
  EXPECT_EQ(q.height(), 3);
  for (float v : q.pixels()) EXPECT_FLOAT_EQ(v, 0.3f);
}

TEST(DownscaleQuarter, BlockMean) {
  const ScalarMap m = mask_from(4, 4, [](int x, int y) { return (4 * y + x) / 15.0; });
  const ScalarMap q = downscale_quarter(m);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_NEAR(q[0], 0.5f, 1e-6);
}

TEST(DownscaleQuarter, CeilSizeAndPartialBlocks) {
  const ScalarMap m = mask_from(5, 4, [](int x, int) { return x == 4 ? 1.0 : 0.0; });
  const ScalarMap q = downscale_quarter(m);
  EXPECT_EQ(q.width(), 2);
  EXPECT_EQ(q.height(), 1);
  EXPECT_FLOAT_EQ(q.at(0, 0), 0.0f);
  EXPECT_FLOAT_EQ(q.at(1, 0), 1.0f);  // edge block averages its one column
}

TEST(DownscaleQuarter, DepthIgnoresInvalid) {
  ScalarMap d(4, 4, MapKind::kDepth, 2.0f);
  d.at(0, 0) = kInvalidDepth;
  d.at(1, 1) = 4.0f;
  const ScalarMap q = downscale_quarter(d);
  EXPECT_NEAR(q[0], (14 * 2.0 + 4.0) / 15.0, 1e-6);
  EXPECT_EQ(q.kind(), MapKind::kDepth);
  const ScalarMap empty = downscale_quarter(ScalarMap(4, 4, MapKind::kDepth));
  EXPECT_EQ(empty[0], kInvalidDepth);
}

TEST(DownscaleQuarter, ColorMatchesBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(0, 1);
  std::vector<Rgb> px(11 * 6);
  for (Rgb& p : px) p = {u(rng), u(rng), u(rng)};
  const ColorImage img = ColorImage::from_pixels(11, 6, px);
  const ColorImage q = downscale_quarter(img);
  ASSERT_EQ(q.width(), 3);
  ASSERT_EQ(q.height(), 2);
  for (int by = 0; by < 2; ++by) {
    for (int bx = 0; bx < 3; ++bx) {
      double s = 0;
      int n = 0;
      for (int y = 4 * by; y < std::min(6, 4 * by + 4); ++y) {
        for (int x = 4 * bx; x < std::min(11, 4 * bx + 4); ++x) {
          s += img.at(x, y).g;
          ++n;
        }
      }
      EXPECT_NEAR(q.at(bx, by).g, s / n, 1e-6);
    }
  }
}

TEST(Maxpool3, ConstantUnchanged) {
  const ScalarMap m(6, 5, MapKind::kMask, 0.4f);
  EXPECT_EQ(maxpool3(m), m);
}

TEST(Maxpool3, SingleSpike) {
  ScalarMap m(7, 7, MapKind::kMask);
  m.at(3, 3) = 1.0f;
  const ScalarMap p = maxpool3(m);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 7; ++x) {
      const bool inside = std::abs(x - 3) <= 1 && std::abs(y - 3) <= 1;
      EXPECT_EQ(p.at(x, y), inside ? 1.0f : 0.0f) << x << "," << y;
    }
  }
}

TEST(Maxpool3, CornerUsesTwoByTwo) {
  ScalarMap m(5, 5, MapKind::kMask);
  m.at(1, 1) = 0.7f;
  m.at(2, 2) = 0.9f;
  const ScalarMap p = maxpool3(m);
  EXPECT_EQ(p.at(0, 0), 0.7f);
  EXPECT_EQ(p.at(4, 4), 0.0f);
  EXPECT_EQ(p.at(3, 3), 0.9f);
}

TEST(Maxpool3, MatchesBruteForceAndIsMonotone) {
  const ScalarMap a = random_mask(13, 9, 5);
  ScalarMap b = a;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0, 0.2f);
  for (float& v : b.pixels()) v = std::min(1.0f, v + u(rng));
  const ScalarMap pa = maxpool3(a), pb = maxpool3(b);
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 13; ++x) {
      float m = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (a.in_bounds(x + dx, y + dy)) m = std::max(m, a.at(x + dx, y + dy));
        }
      }
      EXPECT_EQ(pa.at(x, y), m);
      EXPECT_LE(pa.at(x, y), pb.at(x, y));
    }
  }
  // Dilation only fixes maps that are constant; pooling keeps them fixed.
  const ScalarMap flat(8, 8, MapKind::kMask, 0.35f);
  EXPECT_EQ(maxpool3(maxpool3(flat)), flat);
}

TEST(UpscaleBilinear, ConstantAndOnePixel) {
  const ScalarMap c(3, 2, MapKind::kMask, 0.6f);
  const ScalarMap up = upscale_bilinear(c, 12, 8);
  for (float v : up.pixels()) EXPECT_FLOAT_EQ(v, 0.6f);
  const ScalarMap one(1, 1, MapKind::kMask, 0.25f);
  const ScalarMap big = upscale_bilinear(one, 17, 9);
  EXPECT_EQ(big.width(), 17);
  EXPECT_EQ(big.height(), 9);
  for (float v : big.pixels()) EXPECT_EQ(v, 0.25f);
}

TEST(UpscaleBilinear, RampRoundTrip) {
  const int w = 64, h = 32;
  const ScalarMap ramp = mask_from(w, h, [&](int x, int) { return (x + 0.5) / w; });
  const ScalarMap back = upscale_bilinear(downscale_quarter(ramp), w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 4; x < w - 4; ++x) EXPECT_NEAR(back.at(x, y), ramp.at(x, y), 1.0 / 255) << x;
  }
}

TEST(Resampling, PreservesUnitRange) {
  const ScalarMap m = random_mask(19, 14, 8);
  for (const ScalarMap& r : {downscale_quarter(m), maxpool3(m), upscale_bilinear(m, 40, 23)}) {
    for (float v : r.pixels()) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, 1.0f);
    }
  }
}

TEST(Normals, FrontoParallelPlane) {
  const Camera cam = axis_camera(40, 30, 50);
  const ScalarMap d(40, 30, MapKind::kDepth, 2.0f);
  const NormalMap n = normals_from_depth(d, cam);
  for (int y = 1; y < 29; ++y) {
    for (int x = 1; x < 39; ++x) {
      ASSERT_TRUE(n.valid(x, y));
      EXPECT_NEAR((n.at(x, y) - Eigen::Vector3f(0, 0, -1)).norm(), 0, 1e-5);
    }
  }
  EXPECT_FALSE(n.valid(0, 5));
  EXPECT_FALSE(n.valid(39, 29));
}

TEST(Normals, TiltedPlane) {
  // Plane z = 2 - x: camera-facing normal (-1, 0, -1) / sqrt(2).
  const Camera cam = axis_camera(64, 48, 80);
  ScalarMap d(64, 48, MapKind::kDepth);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) d.at(x, y) = static_cast<float>(2.0 / (1.0 + (x + 0.5 - cam.cx) / cam.fx));
  }
  const NormalMap n = normals_from_depth(d, cam);
  const float s = std::sqrt(0.5f);
  for (int y = 1; y < 47; ++y) {
    for (int x = 1; x < 63; ++x) {
      ASSERT_TRUE(n.valid(x, y));
      EXPECT_NEAR((n.at(x, y) - Eigen::Vector3f(-s, 0, -s)).norm(), 0, 1e-3);
      EXPECT_NEAR(n.at(x, y).norm(), 1.0f, 1e-5);
    }
  }
}

TEST(Normals, InvalidNeighbor) {
  const Camera cam = axis_camera(10, 10, 20);
  ScalarMap d(10, 10, MapKind::kDepth, 1.5f);
  d.at(5, 5) = kInvalidDepth;
  const NormalMap n = normals_from_depth(d, cam);
  EXPECT_FALSE(n.valid(5, 5));
  EXPECT_FALSE(n.valid(4, 5));
  EXPECT_FALSE(n.valid(5, 6));
  EXPECT_TRUE(n.valid(3, 3));
}

}  // namespace
}  // namespace nvs
