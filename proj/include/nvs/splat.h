// SPDX-License-Identifier: Apache-2.0
//
// Forward warping with pixel-sized isotropic 3D Gaussians. Each valid source
// pixel becomes one fully opaque Gaussian whose +-1 sigma footprint covers
// one source pixel; the set is rendered into a target camera front-to-back.
#pragma once

#include <cstdint>
#include <vector>

#include "nvs/camgeom.h"
#include "nvs/raster.h"

namespace nvs {

struct Splat {
  Vec3 center;          // world, meters
  double radius = 0.0;  // isotropic sigma, meters
  Rgb color;
  float opacity = 1.0f;
};

struct SplatSet {
  int source_view = 0;
  std::vector<Splat> splats;
};

struct SplatParams {
  // Source-pixel fraction covered by one sigma: sigma = depth / f * pixel_scale.
  double pixel_scale = 0.5;
  double cutoff_sigmas = 3.0;        // footprint truncation
  double min_radius_px = 1.0;        // footprint floor in target pixels
  float transmittance_cutoff = 1e-3f;
  float alpha_floor = 1e-4f;         // below this the rendered depth is invalid
  int tile_size = 16;
};

// Throws std::invalid_argument when the image, depth and camera sizes differ.
SplatSet gaussians_from_view(const ColorImage& img, const ScalarMap& depth, const Camera& cam,
                             double pixel_scale = SplatParams{}.pixel_scale,
                             int source_view = 0);

struct SplatRender {
  ColorImage color;  // sum_i T_i g_i c_i (over black)
  ScalarMap alpha;   // 1 - prod_i (1 - g_i)
  ScalarMap depth;   // alpha-weighted target depth, invalid where alpha <= alpha_floor
};

// Tiled OpenMP rasterizer. Per pixel, splats are composited in (depth,
// index) order, so the output does not depend on thread count or on the
// order of the input list.
SplatRender render_splats(const SplatSet& set, const Camera& target,
                          const SplatParams& params = {});

namespace reference {

// Serial global painter's-order rasterizer; bit-identical to the tiled one.
SplatRender render_splats(const SplatSet& set, const Camera& target,
                          const SplatParams& params = {});

}  // namespace reference

namespace detail {

struct ProjectedSplat {
  double z = 0.0;
  float u = 0.0f;
  float v = 0.0f;
  float inv_two_sigma2 = 0.0f;  // 1 / (2 sigma_px^2)
  float radius2 = 0.0f;         // squared footprint radius, pixels^2
  float radius = 0.0f;
  Rgb color;
  uint32_t index = 0;
  bool visible = false;
};

std::vector<ProjectedSplat> project_splats(const SplatSet& set, const Camera& target,
                                           const SplatParams& params);

inline bool draw_before(const ProjectedSplat& a, const ProjectedSplat& b) {
  if (a.z != b.z) return a.z < b.z;
  return a.index < b.index;
}

struct PixelAccumulator {
  float transmittance = 1.0f;
  float weight = 0.0f;
  float depth = 0.0f;
  Rgb color;
};

// One front-to-back compositing step of splat `s` at pixel center (px, py).
inline void composite(PixelAccumulator& acc, const ProjectedSplat& s, float px, float py,
                      float transmittance_cutoff) {
  if (acc.transmittance < transmittance_cutoff) return;
  const float dx = px - s.u;
  const float dy = py - s.v;
  const float d2 = dx * dx + dy * dy;
  if (d2 > s.radius2) return;
  const float g = std::exp(-d2 * s.inv_two_sigma2);
  const float contribution = acc.transmittance * g;
  acc.color += s.color * contribution;
  acc.depth += contribution * static_cast<float>(s.z);
  acc.weight += contribution;
  acc.transmittance *= (1.0f - g);
}

void resolve(const PixelAccumulator& acc, const SplatParams& params, SplatRender& out, int x,
             int y);

}  // namespace detail

}  // namespace nvs
