// SPDX-License-Identifier: Apache-2.0
#include "nvs/imgtsdf.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nvs/splat.h"

namespace nvs {

void TsdfParams::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (window < 1 || window % 2 == 0) throw std::invalid_argument("window must be odd and >= 1");
  if (!(step_factor > 0.0 && step_factor < 1.0)) {
    throw std::invalid_argument("step_factor must be in (0, 1)");
  }
  if (bisection_steps < 0) throw std::invalid_argument("bisection_steps must be >= 0");
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  if (!(beta_tmp >= 0.0)) throw std::invalid_argument("beta_tmp must be >= 0");
  if (!(near > 0.0 && far > near)) throw std::invalid_argument("need 0 < near < far");
  if (skip_budget < 1) throw std::invalid_argument("skip_budget must be >= 1");
  if (!(min_step_fraction > 0.0 && min_step_fraction <= 1.0)) {
    throw std::invalid_argument("min_step_fraction must be in (0, 1]");
  }
}

float TsdfParams::edge_range() const {
  return depth_edge > 0.0 ? static_cast<float>(depth_edge * tau)
                          : std::numeric_limits<float>::infinity();
}

TsdfContext::TsdfContext(std::vector<DepthView> views, const TsdfParams& params,
                         std::optional<TemporalDepth> temporal)
    : params_(params), views_(std::move(views)), temporal_(std::move(temporal)) {
  params_.validate();
  weights_.reserve(views_.size());
  for (size_t k = 0; k < views_.size(); ++k) {
    const DepthView& v = views_[k];
    v.camera.validate();
    if (!v.depth.is_depth()) {
      throw std::invalid_argument("view " + std::to_string(k) + ": expected a depth map");
    }
    if (v.depth.width() != v.camera.width || v.depth.height() != v.camera.height) {
      throw std::invalid_argument("view " + std::to_string(k) +
                                  ": depth size does not match the camera");
    }
    weights_.push_back(fusion_weight_map(v.depth, params_));
  }
  if (temporal_) {
    const TemporalDepth& t = *temporal_;
    t.camera.validate();
    if (t.depth.width() != t.camera.width || t.depth.height() != t.camera.height) {
      throw std::invalid_argument("temporal depth size does not match its camera");
    }
    require_same_size(t.depth, t.novel_mask, "temporal mask");
    require_same_size(t.depth, t.accumulated_weight, "temporal weights");
    temporal_weights_ = ScalarMap(t.novel_mask.width(), t.novel_mask.height(), MapKind::kWeight);
    for (size_t i = 0; i < temporal_weights_.size(); ++i) {
      const double keep = std::max(1.0 - static_cast<double>(t.novel_mask[i]), 0.0);
      temporal_weights_[i] = static_cast<float>(
          std::min(params_.beta_tmp * t.accumulated_weight[i] * keep, params_.eta));
    }
  }
}

std::optional<double> signed_distance(const Vec3& p, const Camera& cam, const ScalarMap& depth,
                                      float edge_range) {
  const auto proj = project(p, cam);
  if (!proj) return std::nullopt;
  const auto d = sample_depth(depth, proj->u, proj->v, edge_range);
  if (!d || !valid_depth(*d)) return std::nullopt;
  return proj->z - static_cast<double>(*d);
}

namespace {

float weight_at_pixel(const ScalarMap& depth, int cx, int cy, double tau, int window) {
  if (!depth.in_bounds(cx, cy)) return 0.0f;
  const float center = depth.at(cx, cy);
  if (!valid_depth(center)) return 0.0f;
  const double tau2 = tau * tau;
  const int half = window / 2;
  double nu = 0.0;
  for (int y = cy - half; y <= cy + half; ++y) {
    for (int x = cx - half; x <= cx + half; ++x) {
      if (!depth.in_bounds(x, y) || !valid_depth(depth.at(x, y))) {
        nu += tau2;
        continue;
      }
      const double diff = static_cast<double>(center) - depth.at(x, y);
      nu += std::min(diff * diff, tau2);
    }
  }
  if (nu <= 0.0) return 1.0f;
  const double rms = std::sqrt(nu / (static_cast<double>(window) * window));
  return static_cast<float>(std::min(0.001 / rms, 1.0));
}

}  // namespace

float fusion_weight(const ScalarMap& depth, double u, double v, const TsdfParams& params) {
  if (!(u >= 0.0 && v >= 0.0 && u < depth.width() && v < depth.height())) return 0.0f;
  return weight_at_pixel(depth, static_cast<int>(u), static_cast<int>(v), params.tau,
                         params.window);
}

ScalarMap fusion_weight_map(const ScalarMap& depth, const TsdfParams& params) {
  ScalarMap out(depth.width(), depth.height(), MapKind::kWeight);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      out.at(x, y) = weight_at_pixel(depth, x, y, params.tau, params.window);
    }
  }
  return out;
}

FusedSample fused_tsdf(const Vec3& p, const TsdfContext& ctx, int px, int py,
                       SampleWeights* weights) {
  const TsdfParams& params = ctx.params();
  const double tau = params.tau;
  if (weights) {
    weights->views.assign(ctx.views().size(), 0.0f);
    weights->temporal = 0.0f;
  }
  double sum = 0.0;
  double wsum = 0.0;
  for (size_t k = 0; k < ctx.views().size(); ++k) {
    const DepthView& view = ctx.views()[k];
    const auto proj = project(p, view.camera);
    if (!proj) continue;
    if (!(proj->u >= 0.0 && proj->v >= 0.0 && proj->u < view.camera.width &&
          proj->v < view.camera.height)) {
      continue;
    }
    const double w = ctx.fusion_weights(static_cast<int>(k))
                         .at(static_cast<int>(proj->u), static_cast<int>(proj->v));
    const auto sd = signed_distance(p, view.camera, view.depth, params.edge_range());
    if (!sd || *sd < -tau || !(w > 0.0)) continue;
    sum += w * std::clamp(*sd, -tau, tau);
    wsum += w;
    if (weights) weights->views[k] = static_cast<float>(w);
  }
  if (ctx.temporal()) {
    const ScalarMap& wt = ctx.temporal_weights();
    const TemporalDepth& t = *ctx.temporal();
    const auto proj = project(p, t.camera);
    if (proj && wt.in_bounds(px, py) && t.depth.in_bounds(px, py)) {
      // The previous novel depth was rendered by this target ray: read it at
      // the pixel rather than re-projecting.
      const float prev = t.depth.at(px, py);
      const double w = wt.at(px, py);
      const double sd = proj->z - static_cast<double>(prev);
      if (valid_depth(prev) && w > 0.0 && sd >= -tau) {
        sum += w * std::clamp(sd, -tau, tau);
        wsum += w;
        if (weights) weights->temporal = static_cast<float>(w);
      }
    }
  }

  FusedSample out;
  out.wsum = wsum;
  if (wsum > 0.0) out.s = params.normalize ? sum / wsum : sum;
  return out;
}

ScalarMap update_accumulated_weight(const HitWeights* previous, int width, int height,
                                    double eta) {
  ScalarMap acc(width, height, MapKind::kWeight);
  if (!previous) return acc;
  if (previous->temporal.width() != width || previous->temporal.height() != height) {
    throw std::invalid_argument("update_accumulated_weight: size mismatch");
  }
  const float cap = static_cast<float>(10.0 * eta);
  for (size_t i = 0; i < acc.size(); ++i) {
    float w = previous->temporal[i];
    for (const ScalarMap& v : previous->views) w += v[i];
    acc[i] = std::min(w, cap);
  }
  return acc;
}

ScalarMap splat_masks_to_target(std::span<const ScalarMap> masks, std::span<const Camera> cams,
                                std::span<const ScalarMap> depths, const Camera& target) {
  if (masks.size() != cams.size() || masks.size() != depths.size()) {
    throw std::invalid_argument("splat_masks_to_target: masks, cameras and depths differ in count");
  }
  const SplatParams params;
  ScalarMap out(target.width, target.height, MapKind::kMask, 1.0f);
  std::vector<bool> covered(out.size(), false);
  for (size_t k = 0; k < masks.size(); ++k) {
    ColorImage as_color(masks[k].width(), masks[k].height());
    for (size_t i = 0; i < as_color.size(); ++i) {
      const float m = std::clamp(masks[k][i], 0.0f, 1.0f);
      as_color[i] = {m, m, m};
    }
    const SplatSet set = gaussians_from_view(as_color, depths[k], cams[k], params.pixel_scale,
                                             static_cast<int>(k));
    const SplatRender r = render_splats(set, target, params);
    for (size_t i = 0; i < out.size(); ++i) {
      const float a = r.alpha[i];
      if (!(a > params.alpha_floor)) continue;
      // Un-premultiply: the splats are opaque, color = alpha * mean mask.
      const float m = std::clamp(r.color[i].r / a, 0.0f, 1.0f);
      out[i] = covered[i] ? std::max(out[i], m) : m;
      covered[i] = true;
    }
  }
  return out;
}

}  // namespace nvs
