// SPDX-License-Identifier: Apache-2.0
//
// Brute-force volumetric reference for the image-space field. Deliberately
// simple: one pass over every voxel, one fixed-step march per pixel.
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvs/imgtsdf.h"
#include "nvs/scenegen.h"

namespace nvs {

namespace {

struct Grid3 {
  Vec3 origin;  // center of voxel (0, 0, 0)
  double voxel = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<float> value;   // fused signed distance
  std::vector<float> weight;  // 0 = unobserved

  size_t index(int x, int y, int z) const {
    return (static_cast<size_t>(z) * ny + y) * nx + x;
  }
  Vec3 center(int x, int y, int z) const { return origin + voxel * Vec3(x, y, z); }

  // Trilinear value at p over the observed corners, renormalized; nullopt
  // when they carry less than half the interpolation weight or p lies
  // outside the voxel-center lattice.
  std::optional<double> sample(const Vec3& p) const {
    const Vec3 g = (p - origin) / voxel;
    const int x0 = static_cast<int>(std::floor(g.x()));
    const int y0 = static_cast<int>(std::floor(g.y()));
    const int z0 = static_cast<int>(std::floor(g.z()));
    if (x0 < 0 || y0 < 0 || z0 < 0 || x0 + 1 >= nx || y0 + 1 >= ny || z0 + 1 >= nz) {
      return std::nullopt;
    }
    const double fx = g.x() - x0, fy = g.y() - y0, fz = g.z() - z0;
    double acc = 0.0, wacc = 0.0;
    for (int dz = 0; dz <= 1; ++dz) {
      for (int dy = 0; dy <= 1; ++dy) {
        for (int dx = 0; dx <= 1; ++dx) {
          const size_t i = index(x0 + dx, y0 + dy, z0 + dz);
          if (!(weight[i] > 0.0f)) continue;
          const double w = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy) * (dz ? fz : 1 - fz);
          acc += w * value[i];
          wacc += w;
        }
      }
    }
    if (wacc < 0.5) return std::nullopt;
    return acc / wacc;
  }
};

}  // namespace

ScalarMap voxel_tsdf_oracle(const std::vector<std::pair<Camera, ScalarMap>>& views,
                            const Camera& target, const VoxelOracleParams& params) {
  if (!(params.voxel > 0.0) || !(params.tau > 0.0)) {
    throw std::invalid_argument("voxel_tsdf_oracle: voxel and tau must be positive");
  }
  target.validate();
  ScalarMap out(target.width, target.height, MapKind::kDepth);

  // Grid bounds: every observed point plus a 4 tau margin.
  Aabb box;
  for (const auto& [cam, depth] : views) {
    for (int y = 0; y < depth.height(); ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        if (valid_depth(depth.at(x, y))) box.extend(unproject(x + 0.5, y + 0.5, depth.at(x, y), cam));
      }
    }
  }
  if (box.empty()) return out;
  const Vec3 lo = box.lo - Vec3::Constant(4 * params.tau);
  const Vec3 hi = box.hi + Vec3::Constant(4 * params.tau);

  Grid3 grid;
  grid.voxel = params.voxel;
  grid.origin = lo;
  const Vec3 span = (hi - lo) / params.voxel;
  grid.nx = static_cast<int>(std::ceil(span.x())) + 1;
  grid.ny = static_cast<int>(std::ceil(span.y())) + 1;
  grid.nz = static_cast<int>(std::ceil(span.z())) + 1;
  if (grid.nx > params.max_dim || grid.ny > params.max_dim || grid.nz > params.max_dim) {
    throw std::invalid_argument("voxel_tsdf_oracle: scene needs a " + std::to_string(grid.nx) + "x" +
                                std::to_string(grid.ny) + "x" + std::to_string(grid.nz) +
                                " grid, above the " + std::to_string(params.max_dim) + " limit");
  }
  const size_t count = static_cast<size_t>(grid.nx) * grid.ny * grid.nz;
  grid.value.assign(count, 0.0f);
  grid.weight.assign(count, 0.0f);

  TsdfParams wp;
  wp.tau = params.tau;
  wp.window = params.window;
  wp.depth_edge = params.depth_edge;
  const float edge_range = wp.edge_range();
  std::vector<ScalarMap> weight_maps;
  for (const auto& [cam, depth] : views) weight_maps.push_back(fusion_weight_map(depth, wp));

  const double tau = params.tau;
#pragma omp parallel for schedule(static)
  for (int z = 0; z < grid.nz; ++z) {
    for (int y = 0; y < grid.ny; ++y) {
      for (int x = 0; x < grid.nx; ++x) {
        const Vec3 p = grid.center(x, y, z);
        double sum = 0.0, wsum = 0.0;
        for (size_t k = 0; k < views.size(); ++k) {
          const auto& [cam, depth] = views[k];
          const auto proj = project(p, cam);
          if (!proj || !(proj->u >= 0 && proj->v >= 0 && proj->u < cam.width && proj->v < cam.height)) {
            continue;
          }
          const auto d = sample_depth(depth, proj->u, proj->v, edge_range);
          if (!d || !valid_depth(*d)) continue;
          const double s = proj->z - *d;
          if (s < -tau) continue;
          const double w = weight_maps[k].at(static_cast<int>(proj->u), static_cast<int>(proj->v));
          if (!(w > 0.0)) continue;
          sum += w * std::clamp(s, -tau, tau);
          wsum += w;
        }
        if (wsum > 0.0) {
          const size_t i = grid.index(x, y, z);
          grid.value[i] = static_cast<float>(sum / wsum);
          grid.weight[i] = static_cast<float>(wsum);
        }
      }
    }
  }

  // March each pixel ray through the grid in steps of half a voxel.
  const Vec3 origin = target.center();
#pragma omp parallel for schedule(dynamic, 1)
  for (int py = 0; py < target.height; ++py) {
    for (int px = 0; px < target.width; ++px) {
      const Vec3 dir = depth_ray(target, px + 0.5, py + 0.5);
      // Slab clip against the grid box, in target-depth units.
      double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        if (std::fabs(dir[i]) < 1e-15) {
          if (origin[i] < lo[i] || origin[i] > hi[i]) t1 = -1.0;
          continue;
        }
        double a = (lo[i] - origin[i]) / dir[i];
        double b = (hi[i] - origin[i]) / dir[i];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
      }
      if (!(t0 <= t1)) continue;
      const double step = 0.5 * params.voxel / dir.norm();
      bool prev_negative = false;
      double prev_t = 0.0, prev_s = 0.0;
      for (double t = t0; t <= t1; t += step) {
        // Same crossing rule as the image-space march: an unobserved sample
        // breaks a - to + transition.
        const auto s = grid.sample(origin + t * dir);
        if (!s) {
          prev_negative = false;
          continue;
        }
        if (*s < 0.0) {
          prev_negative = true;
          prev_t = t;
          prev_s = *s;
          continue;
        }
        if (prev_negative) {
          out.at(px, py) = static_cast<float>(prev_t + (t - prev_t) * (-prev_s) / (*s - prev_s));
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace nvs
