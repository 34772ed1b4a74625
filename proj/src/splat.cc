// SPDX-License-Identifier: Apache-2.0
#include "nvs/splat.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvs {

SplatSet gaussians_from_view(const ColorImage& img, const ScalarMap& depth, const Camera& cam,
                             double pixel_scale, int source_view) {
  require_same_size(img, depth, "gaussians_from_view");
  if (img.width() != cam.width || img.height() != cam.height) {
    throw std::invalid_argument("gaussians_from_view: image size does not match the camera");
  }
  if (!(pixel_scale > 0.0)) throw std::invalid_argument("pixel_scale must be positive");

  SplatSet set;
  set.source_view = source_view;
  set.splats.reserve(depth.size());
  const double focal = cam.mean_focal();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const float d = depth.at(x, y);
      if (!valid_depth(d)) continue;
      Splat s;
      s.center = unproject(x + 0.5, y + 0.5, d, cam);
      s.radius = d / focal * pixel_scale;
      s.color = img.at(x, y);
      set.splats.push_back(s);
    }
  }
  return set;
}

namespace detail {

std::vector<ProjectedSplat> project_splats(const SplatSet& set, const Camera& target,
                                           const SplatParams& params) {
  std::vector<ProjectedSplat> out(set.splats.size());
  const double focal = target.mean_focal();
  const long n = static_cast<long>(set.splats.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    const Splat& s = set.splats[i];
    ProjectedSplat& p = out[i];
    p.index = static_cast<uint32_t>(i);
    const auto proj = project(s.center, target);
    if (!proj || !(s.radius > 0.0)) continue;
    const double sigma_px = s.radius * focal / proj->z;
    const double radius = std::max(params.cutoff_sigmas * sigma_px, params.min_radius_px);
    // Cull footprints entirely outside the image.
    if (proj->u + radius < 0.0 || proj->v + radius < 0.0 || proj->u - radius > target.width ||
        proj->v - radius > target.height) {
      continue;
    }
    p.z = proj->z;
    p.u = static_cast<float>(proj->u);
    p.v = static_cast<float>(proj->v);
    p.inv_two_sigma2 = static_cast<float>(1.0 / (2.0 * sigma_px * sigma_px));
    p.radius = static_cast<float>(radius);
    p.radius2 = static_cast<float>(radius * radius);
    p.color = s.color;
    p.visible = true;
  }
  return out;
}

void resolve(const PixelAccumulator& acc, const SplatParams& params, SplatRender& out, int x,
             int y) {
  const float alpha = std::min(1.0f - acc.transmittance, 1.0f);
  out.color.at(x, y) = acc.color.clamped();
  out.alpha.at(x, y) = std::clamp(alpha, 0.0f, 1.0f);
  out.depth.at(x, y) =
      (alpha > params.alpha_floor && acc.weight > 0.0f) ? acc.depth / acc.weight : kInvalidDepth;
}

}  // namespace detail

namespace {

struct PixelRange {
  int x0, x1, y0, y1;  // inclusive; empty when x0 > x1 or y0 > y1
};

PixelRange footprint(const detail::ProjectedSplat& s, int width, int height) {
  // Pixel centers i + 0.5 within [u - r, u + r].
  PixelRange r;
  r.x0 = std::max(0, static_cast<int>(std::ceil(s.u - s.radius - 0.5f)));
  r.x1 = std::min(width - 1, static_cast<int>(std::floor(s.u + s.radius - 0.5f)));
  r.y0 = std::max(0, static_cast<int>(std::ceil(s.v - s.radius - 0.5f)));
  r.y1 = std::min(height - 1, static_cast<int>(std::floor(s.v + s.radius - 0.5f)));
  return r;
}

SplatRender allocate(const Camera& target) {
  return SplatRender{ColorImage(target.width, target.height),
                     ScalarMap(target.width, target.height, MapKind::kAlpha),
                     ScalarMap(target.width, target.height, MapKind::kDepth)};
}

}  // namespace

SplatRender render_splats(const SplatSet& set, const Camera& target, const SplatParams& params) {
  if (params.tile_size <= 0) throw std::invalid_argument("tile_size must be positive");
  const auto projected = detail::project_splats(set, target, params);
  const int tile = params.tile_size;
  const int tiles_x = (target.width + tile - 1) / tile;
  const int tiles_y = (target.height + tile - 1) / tile;
  const int num_tiles = tiles_x * tiles_y;

  // Bin splats into every tile their footprint touches (counting sort).
  std::vector<PixelRange> ranges(projected.size());
  std::vector<uint32_t> offsets(num_tiles + 1, 0);
  for (size_t i = 0; i < projected.size(); ++i) {
    if (!projected[i].visible) continue;
    const PixelRange r = footprint(projected[i], target.width, target.height);
    ranges[i] = r;
    if (r.x0 > r.x1 || r.y0 > r.y1) continue;
    for (int ty = r.y0 / tile; ty <= r.y1 / tile; ++ty) {
      for (int tx = r.x0 / tile; tx <= r.x1 / tile; ++tx) ++offsets[ty * tiles_x + tx + 1];
    }
  }
  for (int t = 0; t < num_tiles; ++t) offsets[t + 1] += offsets[t];
  std::vector<uint32_t> entries(offsets[num_tiles]);
  {
    std::vector<uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (size_t i = 0; i < projected.size(); ++i) {
      if (!projected[i].visible) continue;
      const PixelRange& r = ranges[i];
      if (r.x0 > r.x1 || r.y0 > r.y1) continue;
      for (int ty = r.y0 / tile; ty <= r.y1 / tile; ++ty) {
        for (int tx = r.x0 / tile; tx <= r.x1 / tile; ++tx) {
          entries[cursor[ty * tiles_x + tx]++] = static_cast<uint32_t>(i);
        }
      }
    }
  }

  SplatRender out = allocate(target);
#pragma omp parallel
  {
    std::vector<detail::PixelAccumulator> acc(static_cast<size_t>(tile) * tile);
    std::vector<std::pair<double, uint32_t>> order;
#pragma omp for schedule(dynamic, 4)
    for (int t = 0; t < num_tiles; ++t) {
      const int tx0 = (t % tiles_x) * tile;
      const int ty0 = (t / tiles_x) * tile;
      const int tx1 = std::min(tx0 + tile, target.width) - 1;
      const int ty1 = std::min(ty0 + tile, target.height) - 1;
      // (z, index) pairs sort in draw_before order.
      order.clear();
      for (uint32_t e = offsets[t]; e < offsets[t + 1]; ++e) {
        order.emplace_back(projected[entries[e]].z, entries[e]);
      }
      std::sort(order.begin(), order.end());
      std::fill(acc.begin(), acc.end(), detail::PixelAccumulator{});
      for (const auto& [z, index] : order) {
        const auto& s = projected[index];
        const PixelRange& r = ranges[index];
        for (int y = std::max(r.y0, ty0); y <= std::min(r.y1, ty1); ++y) {
          for (int x = std::max(r.x0, tx0); x <= std::min(r.x1, tx1); ++x) {
            detail::composite(acc[(y - ty0) * tile + (x - tx0)], s, x + 0.5f, y + 0.5f,
                              params.transmittance_cutoff);
          }
        }
      }
      for (int y = ty0; y <= ty1; ++y) {
        for (int x = tx0; x <= tx1; ++x) {
          detail::resolve(acc[(y - ty0) * tile + (x - tx0)], params, out, x, y);
        }
      }
    }
  }
  return out;
}

namespace reference {

SplatRender render_splats(const SplatSet& set, const Camera& target, const SplatParams& params) {
  auto projected = detail::project_splats(set, target, params);
  std::erase_if(projected, [](const detail::ProjectedSplat& s) { return !s.visible; });
  std::sort(projected.begin(), projected.end(), detail::draw_before);

  std::vector<detail::PixelAccumulator> acc(static_cast<size_t>(target.width) * target.height);
  for (const auto& s : projected) {
    const PixelRange r = footprint(s, target.width, target.height);
    for (int y = r.y0; y <= r.y1; ++y) {
      for (int x = r.x0; x <= r.x1; ++x) {
        detail::composite(acc[static_cast<size_t>(y) * target.width + x], s, x + 0.5f, y + 0.5f,
                          params.transmittance_cutoff);
      }
    }
  }
  SplatRender out = allocate(target);
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      detail::resolve(acc[static_cast<size_t>(y) * target.width + x], params, out, x, y);
    }
  }
  return out;
}

}  // namespace reference

}  // namespace nvs
