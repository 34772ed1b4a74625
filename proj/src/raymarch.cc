// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvs/imgtsdf.h"
#include "raymarch_internal.h"

namespace nvs {

namespace {

// sample_depth() for (u, v) already known to lie inside [0, w) x [0, h);
// same taps, weights and summation order, so results are bit-identical.
inline bool sample_inside(const ScalarMap& depth, double u, double v, float max_range, float& out) {
  const int w = depth.width();
  const int h = depth.height();
  const double x = u - 0.5;
  const double y = v - 0.5;
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const float ax = static_cast<float>(x - fx0);
  const float ay = static_cast<float>(y - fy0);
  const int ix = static_cast<int>(fx0);
  const int iy = static_cast<int>(fy0);
  const int xs[2] = {std::clamp(ix, 0, w - 1), std::clamp(ix + 1, 0, w - 1)};
  const int ys[2] = {std::clamp(iy, 0, h - 1), std::clamp(iy + 1, 0, h - 1)};
  const float wx[2] = {1.0f - ax, ax};
  const float wy[2] = {1.0f - ay, ay};
  const float* data = depth.pixels().data();
  float lo = std::numeric_limits<float>::infinity();
  float hi = -lo;
  float acc = 0.0f;
  for (int j = 0; j < 2; ++j) {
    if (!(wy[j] > 0)) continue;
    const float* row = data + static_cast<size_t>(ys[j]) * w;
    for (int i = 0; i < 2; ++i) {
      if (!(wx[i] > 0)) continue;
      const float d = row[xs[i]];
      if (!valid_depth(d)) return false;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      acc += wx[i] * wy[j] * d;
    }
  }
  if (hi - lo > max_range) return false;
  out = acc;
  return true;
}

// One depth source (input view or previous novel view) in ray-local form:
// its camera-space point along the target ray is a + z * b.
struct Source {
  const Camera* cam = nullptr;
  const ScalarMap* depth = nullptr;
  const ScalarMap* weights = nullptr;  // per-pixel fusion weight; null for the temporal source
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  // Temporal source only: weight and previous depth of the current pixel.
  float pixel_weight = 0.0f;
  float pixel_depth = kInvalidDepth;
  bool temporal = false;
};

class RayEvaluator {
 public:
  RayEvaluator(const TsdfContext& ctx, const Camera& target)
      : ctx_(ctx), target_(target), edge_range_(ctx.params().edge_range()) {
    for (const DepthView& v : ctx.views()) {
      sources_.push_back({&v.camera, &v.depth, nullptr, v.camera.rotation * target.center() +
                                                            v.camera.translation});
    }
    for (size_t k = 0; k < ctx.views().size(); ++k) sources_[k].weights = &ctx.fusion_weights(k);
    if (ctx.temporal()) {
      const TemporalDepth& t = *ctx.temporal();
      Source s{&t.camera, &t.depth, nullptr,
               t.camera.rotation * target.center() + t.camera.translation};
      s.temporal = true;
      sources_.push_back(s);
    }
  }

  void reset(int px, int py) {
    const Vec3 d = depth_ray(target_, px + 0.5, py + 0.5);
    for (Source& s : sources_) s.b = s.cam->rotation * d;
    if (ctx_.temporal()) {
      Source& s = sources_.back();
      s.pixel_weight = ctx_.temporal_weights().at(px, py);
      s.pixel_depth = ctx_.temporal()->depth.at(px, py);
    }
  }

  FusedSample operator()(double z, SampleWeights* record) const {
    const double tau = ctx_.params().tau;
    const size_t num_views = ctx_.views().size();
    if (record) {
      record->views.assign(num_views, 0.0f);
      record->temporal = 0.0f;
    }
    double sum = 0.0;
    double wsum = 0.0;
    for (size_t k = 0; k < sources_.size(); ++k) {
      const Source& s = sources_[k];
      const Vec3 pc = s.a + z * s.b;
      if (pc.z() <= kMinProjectDepth) continue;
      double w;
      float d;
      if (s.temporal) {
        w = s.pixel_weight;
        d = s.pixel_depth;
      } else {
        const double u = s.cam->fx * pc.x() / pc.z() + s.cam->cx;
        const double v = s.cam->fy * pc.y() / pc.z() + s.cam->cy;
        if (!(u >= 0.0 && v >= 0.0 && u < s.cam->width && v < s.cam->height)) continue;
        w = s.weights->at(static_cast<int>(u), static_cast<int>(v));
        if (!(w > 0.0)) continue;
        if (!sample_inside(*s.depth, u, v, edge_range_, d)) continue;
      }
      if (!(w > 0.0) || !valid_depth(d)) continue;
      const double sd = pc.z() - static_cast<double>(d);
      if (sd < -tau) continue;
      sum += w * std::clamp(sd, -tau, tau);
      wsum += w;
      if (record) {
        if (k < num_views) {
          record->views[k] = static_cast<float>(w);
        } else {
          record->temporal = static_cast<float>(w);
        }
      }
    }
    FusedSample out;
    out.wsum = wsum;
    if (wsum > 0.0) out.s = ctx_.params().normalize ? sum / wsum : sum;
    return out;
  }

 private:
  const TsdfContext& ctx_;
  const Camera& target_;
  float edge_range_;
  std::vector<Source> sources_;
};

MarchResult allocate(const TsdfContext& ctx, const Camera& target) {
  MarchResult r;
  r.depth = ScalarMap(target.width, target.height, MapKind::kDepth);
  r.hitmask = ScalarMap(target.width, target.height, MapKind::kMask);
  r.weights.views.assign(ctx.views().size(),
                         ScalarMap(target.width, target.height, MapKind::kWeight));
  r.weights.temporal = ScalarMap(target.width, target.height, MapKind::kWeight);
  return r;
}

void store(MarchResult& r, int x, int y, const PixelMarch& m, const SampleWeights& w) {
  if (!m.hit) return;
  r.depth.at(x, y) = static_cast<float>(m.depth);
  r.hitmask.at(x, y) = 1.0f;
  for (size_t k = 0; k < w.views.size(); ++k) r.weights.views[k].at(x, y) = w.views[k];
  r.weights.temporal.at(x, y) = w.temporal;
}

void check_target(const TsdfContext& ctx, const Camera& target) {
  target.validate();
  if (ctx.temporal() && (ctx.temporal()->depth.width() != target.width ||
                         ctx.temporal()->depth.height() != target.height)) {
    throw std::invalid_argument("temporal maps do not match the target size");
  }
}

// Absorbs float rounding of the stored bounds.
constexpr double kBoundsSlack = 1e-4;

// Camera-space point of a source pixel ray at source depth d, expressed in
// the target frame: a + d * (m * r) with r = ((u - cx) / fx, (v - cy) / fy, 1).
struct SourceToTarget {
  Mat3 m;
  Vec3 a;
  SourceToTarget(const Camera& src, const Camera& target)
      : m(target.rotation * src.rotation.transpose()),
        a(target.rotation * src.center() + target.translation) {}
};

struct BoundsBuffer {
  std::vector<float> lo;
  std::vector<float> hi;
  explicit BoundsBuffer(size_t n)
      : lo(n, std::numeric_limits<float>::infinity()), hi(n, -std::numeric_limits<float>::infinity()) {}
};

// The points where a bilinear cell of `depth` reports s in [-tau, 0] lie
// in the frustum spanned by the cell corners at source depths
// [dmin - tau, dmax]. Its projection bounds the target pixels and depths
// where that cell can supply the negative sample of a crossing.
void add_source_bounds(const Camera& cam, const ScalarMap& depth, const Camera& target,
                       double tau, double z_pad, BoundsBuffer& out) {
  const int w = depth.width();
  const int h = depth.height();
  const SourceToTarget xf(cam, target);
  const int tw = target.width;
  const int th = target.height;
  auto widen = [&](int x0, int x1, int y0, int y1, float zlo, float zhi) {
    for (int y = std::max(y0, 0); y <= std::min(y1, th - 1); ++y) {
      for (int x = std::max(x0, 0); x <= std::min(x1, tw - 1); ++x) {
        const size_t i = static_cast<size_t>(y) * tw + x;
        out.lo[i] = std::min(out.lo[i], zlo);
        out.hi[i] = std::max(out.hi[i], zhi);
      }
    }
  };
#pragma omp for schedule(static)
  for (int j = -1; j < h; ++j) {
    const int y0 = std::clamp(j, 0, h - 1);
    const int y1 = std::clamp(j + 1, 0, h - 1);
    const double va = std::max(j + 0.5, 0.0);
    const double vb = std::min(j + 1.5, static_cast<double>(h));
    for (int i = -1; i < w; ++i) {
      const int x0 = std::clamp(i, 0, w - 1);
      const int x1 = std::clamp(i + 1, 0, w - 1);
      float dmin = std::numeric_limits<float>::infinity();
      float dmax = -dmin;
      for (float d : {depth.at(x0, y0), depth.at(x1, y0), depth.at(x0, y1), depth.at(x1, y1)}) {
        if (!valid_depth(d)) continue;
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
      }
      if (!(dmin <= dmax)) continue;
      const double ua = std::max(i + 0.5, 0.0);
      const double ub = std::min(i + 1.5, static_cast<double>(w));
      const double d0 = std::max(dmin - tau, 1e-3);
      const double d1 = dmax;
      double umin = std::numeric_limits<double>::infinity(), umax = -umin;
      double vmin = umin, vmax = -umin, zmin = umin, zmax = -umin;
      bool behind = false;
      for (double u : {ua, ub}) {
        for (double v : {va, vb}) {
          const Vec3 r = xf.m * Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
          for (double d : {d0, d1}) {
            const Vec3 p = xf.a + d * r;
            if (p.z() <= kMinProjectDepth) {
              behind = true;
              continue;
            }
            const double pu = target.fx * p.x() / p.z() + target.cx;
            const double pv = target.fy * p.y() / p.z() + target.cy;
            umin = std::min(umin, pu);
            umax = std::max(umax, pu);
            vmin = std::min(vmin, pv);
            vmax = std::max(vmax, pv);
            zmin = std::min(zmin, p.z());
            zmax = std::max(zmax, p.z());
          }
        }
      }
      if (!(zmin <= zmax)) continue;
      const float zlo = static_cast<float>(zmin - kBoundsSlack);
      const float zhi = static_cast<float>(zmax + z_pad);
      if (behind) {
        // The frustum crosses the target's image plane; its projection is
        // unbounded.
        widen(0, tw - 1, 0, th - 1, 0.0f, zhi);
        continue;
      }
      // Pixels whose centers fall within half a pixel of the projection.
      if (umax < -1.0 || vmax < -1.0 || umin > tw + 1.0 || vmin > th + 1.0) continue;
      widen(static_cast<int>(std::ceil(umin - 1.0)), static_cast<int>(std::floor(umax)),
            static_cast<int>(std::ceil(vmin - 1.0)), static_cast<int>(std::floor(vmax)), zlo, zhi);
    }
  }
}

// The previous novel depth is read at the marched pixel itself.
void add_temporal_bounds(const ScalarMap& depth, double tau, double z_pad, BoundsBuffer& out) {
#pragma omp for schedule(static)
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const float d = depth.at(x, y);
      if (!valid_depth(d)) continue;
      const size_t i = static_cast<size_t>(y) * depth.width() + x;
      out.lo[i] = std::min(out.lo[i], static_cast<float>(d - tau - kBoundsSlack));
      out.hi[i] = std::max(out.hi[i], static_cast<float>(d + z_pad));
    }
  }
}

}  // namespace

MarchBounds compute_march_bounds(const TsdfContext& ctx, const Camera& target) {
  check_target(ctx, target);
  const size_t n = static_cast<size_t>(target.width) * target.height;
  MarchBounds b;
  b.width = target.width;
  b.height = target.height;
  b.z_lo.assign(n, std::numeric_limits<float>::infinity());
  b.z_hi.assign(n, -std::numeric_limits<float>::infinity());
  // The negative sample of a crossing has some source with s_k in [-tau, 0);
  // the positive sample follows within one step, at most step_factor * tau.
  const TsdfParams& params = ctx.params();
  const double tau = params.tau;
  const double z_pad = params.step_factor * std::max(tau, params.min_step()) + kBoundsSlack;
#pragma omp parallel
  {
    BoundsBuffer local(n);
    for (const DepthView& v : ctx.views()) add_source_bounds(v.camera, v.depth, target, tau, z_pad, local);
    if (ctx.temporal()) add_temporal_bounds(ctx.temporal()->depth, tau, z_pad, local);
#pragma omp critical
    for (size_t i = 0; i < n; ++i) {
      b.z_lo[i] = std::min(b.z_lo[i], local.lo[i]);
      b.z_hi[i] = std::max(b.z_hi[i], local.hi[i]);
    }
  }
  return b;
}

PixelMarch march_pixel(const TsdfContext& ctx, const Camera& target, int px, int py,
                       double z_begin, double z_end) {
  check_target(ctx, target);
  RayEvaluator eval(ctx, target);
  eval.reset(px, py);
  return detail::march_ray(eval, z_begin, z_end, ctx.params(), nullptr);
}

MarchResult raymarch_depth(const TsdfContext& ctx, const Camera& target) {
  check_target(ctx, target);
  const TsdfParams& params = ctx.params();
  const MarchBounds bounds = compute_march_bounds(ctx, target);
  MarchResult r = allocate(ctx, target);
#pragma omp parallel
  {
    RayEvaluator eval(ctx, target);
    SampleWeights w;
#pragma omp for schedule(dynamic, 1)
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        const double z0 = std::max(params.near, static_cast<double>(bounds.lo(x, y)));
        const double z1 = std::min(params.far, static_cast<double>(bounds.hi(x, y)));
        if (!(z0 <= z1)) continue;
        eval.reset(x, y);
        store(r, x, y, detail::march_ray(eval, z0, z1, params, &w), w);
      }
    }
  }
  return r;
}

namespace reference {

MarchResult raymarch_depth(const TsdfContext& ctx, const Camera& target) {
  check_target(ctx, target);
  const TsdfParams& params = ctx.params();
  MarchResult r = allocate(ctx, target);
  SampleWeights w;
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      const Vec3 origin = target.center();
      const Vec3 dir = depth_ray(target, x + 0.5, y + 0.5);
      auto eval = [&](double z, SampleWeights* record) {
        return fused_tsdf(origin + z * dir, ctx, x, y, record);
      };
      store(r, x, y, detail::march_ray(eval, params.near, params.far, params, &w), w);
    }
  }
  return r;
}

}  // namespace reference

}  // namespace nvs
