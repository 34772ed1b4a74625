// SPDX-License-Identifier: Apache-2.0
#include "nvs/blend.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace nvs {

namespace {

constexpr float kHoleDenominator = 1e-6f;

void check_renders(std::span<const SplatRender> renders, int width, int height) {
  for (const SplatRender& r : renders) {
    if (r.color.width() != width || r.color.height() != height || !r.alpha.same_size(r.color) ||
        !r.depth.same_size(r.color)) {
      throw std::invalid_argument("blend: render size does not match the target");
    }
  }
}

BlendWeights empty_weights(int k, int width, int height, float fill) {
  BlendWeights w;
  w.views.assign(k, ScalarMap(width, height, MapKind::kWeight, fill));
  return w;
}

}  // namespace

std::string to_string(BlendStrategy s) {
  switch (s) {
    case BlendStrategy::kUniform:
      return "uniform";
    case BlendStrategy::kDistance:
      return "distance";
    case BlendStrategy::kHeuristic:
      return "heuristic";
  }
  return "unknown";
}

BlendStrategy parse_blend_strategy(const std::string& name) {
  if (name == "uniform") return BlendStrategy::kUniform;
  if (name == "distance") return BlendStrategy::kDistance;
  if (name == "heuristic") return BlendStrategy::kHeuristic;
  throw std::invalid_argument("unknown blend strategy '" + name +
                              "' (expected uniform, distance or heuristic)");
}

BlendFeatures compute_features(std::span<const SplatRender> renders, const Camera& target,
                               const ScalarMap& tsdf_depth, std::span<const Camera> src_cams) {
  if (renders.size() != src_cams.size()) {
    throw std::invalid_argument("compute_features: renders and cameras differ in count");
  }
  if (tsdf_depth.width() != target.width || tsdf_depth.height() != target.height) {
    throw std::invalid_argument("compute_features: TSDF depth does not match the target");
  }
  check_renders(renders, target.width, target.height);

  BlendFeatures f;
  f.renders = renders;
  f.tsdf_depth = &tsdf_depth;
  const NormalMap normals = normals_from_depth(tsdf_depth, target);
  const Vec3 target_center = target.center();
  const int w = target.width;
  const int h = target.height;

  for (size_t k = 0; k < renders.size(); ++k) {
    ViewFeatures vf;
    vf.normal_dot = ScalarMap(w, h, MapKind::kWeight);
    vf.ray_dot = ScalarMap(w, h, MapKind::kWeight);
    const Vec3 src_center = src_cams[k].center();
    vf.camera_distance = (src_center - target_center).norm();
    vf.axis_dot = std::clamp(src_cams[k].forward().dot(target.forward()), -1.0, 1.0);
    const ScalarMap& own_depth = renders[k].depth;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        float d = tsdf_depth.at(x, y);
        const bool on_tsdf = valid_depth(d);
        if (!on_tsdf) d = own_depth.at(x, y);
        if (!valid_depth(d)) continue;
        const Vec3 p = unproject(x + 0.5, y + 0.5, d, target);
        const Vec3 to_src = src_center - p;
        const Vec3 to_tgt = target_center - p;
        if (to_src.norm() <= 0.0 || to_tgt.norm() <= 0.0) continue;
        // Both rays point away from their cameras.
        vf.ray_dot.at(x, y) = static_cast<float>(
            std::clamp((-to_src.normalized()).dot(-to_tgt.normalized()), -1.0, 1.0));
        if (on_tsdf && normals.valid(x, y)) {
          vf.normal_dot.at(x, y) = static_cast<float>(std::clamp(
              to_src.normalized().dot(normals.at(x, y).cast<double>()), -1.0, 1.0));
        }
      }
    }
    f.views.push_back(std::move(vf));
  }
  return f;
}

std::vector<float> feature_tensor(const BlendFeatures& feat) {
  const size_t plane = static_cast<size_t>(feat.width()) * feat.height();
  const size_t k = feat.views.size();
  std::vector<float> t((9 * k + 1) * plane);
  for (size_t v = 0; v < k; ++v) {
    float* base = t.data() + 9 * v * plane;
    const SplatRender& r = feat.renders[v];
    const ViewFeatures& vf = feat.views[v];
    for (size_t i = 0; i < plane; ++i) {
      base[i] = r.color[i].r;
      base[plane + i] = r.color[i].g;
      base[2 * plane + i] = r.color[i].b;
      base[3 * plane + i] = r.depth[i];
      base[4 * plane + i] = r.alpha[i];
      base[5 * plane + i] = vf.normal_dot[i];
      base[6 * plane + i] = vf.ray_dot[i];
      base[7 * plane + i] = static_cast<float>(vf.camera_distance);
      base[8 * plane + i] = static_cast<float>(vf.axis_dot);
    }
  }
  std::copy(feat.tsdf_depth->pixels().begin(), feat.tsdf_depth->pixels().end(),
            t.begin() + static_cast<std::ptrdiff_t>(9 * k * plane));
  return t;
}

BlendWeights UniformWeights::weights(const BlendFeatures& feat) const {
  BlendWeights w = empty_weights(feat.num_views(), feat.width(), feat.height(), 1.0f);
  finish_background(feat.renders, w);
  return w;
}

BlendWeights DistanceWeights::weights(const BlendFeatures& feat) const {
  BlendWeights w = empty_weights(feat.num_views(), feat.width(), feat.height(), 0.0f);
  if (feat.views.empty()) {
    finish_background(feat.renders, w);
    return w;
  }
  constexpr double kEps = 1e-6;
  double nearest = feat.views.front().camera_distance;
  for (const ViewFeatures& v : feat.views) nearest = std::min(nearest, v.camera_distance);
  for (size_t k = 0; k < feat.views.size(); ++k) {
    const float value = static_cast<float>((nearest + kEps) / (feat.views[k].camera_distance + kEps));
    std::fill(w.views[k].pixels().begin(), w.views[k].pixels().end(), value);
  }
  finish_background(feat.renders, w);
  return w;
}

HeuristicWeights::HeuristicWeights(BlendParams params) : params_(params) {
  if (!(params_.sigma_d > 0.0)) throw std::invalid_argument("sigma_d must be positive");
  if (!(params_.gamma_angle >= 0.0)) throw std::invalid_argument("gamma_angle must be >= 0");
}

BlendWeights HeuristicWeights::weights(const BlendFeatures& feat) const {
  const int k = feat.num_views();
  BlendWeights w = empty_weights(k, feat.width(), feat.height(), 0.0f);
  const ScalarMap& tsdf = *feat.tsdf_depth;
  const size_t n = tsdf.size();
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) {
    float best = 0.0f;
    for (int v = 0; v < k; ++v) {
      const SplatRender& r = feat.renders[v];
      const float alpha = r.alpha[i];
      double agreement = 1.0;  // no guidance without both depths
      if (valid_depth(tsdf[i]) && valid_depth(r.depth[i])) {
        agreement = std::exp(-std::fabs(static_cast<double>(r.depth[i]) - tsdf[i]) /
                             params_.sigma_d);
      }
      const double angle =
          std::pow(std::max(static_cast<double>(feat.views[v].ray_dot[i]), 0.0),
                   params_.gamma_angle);
      const float raw = static_cast<float>(agreement * angle * alpha);
      w.views[v][i] = raw;
      best = std::max(best, raw);
    }
    for (int v = 0; v < k; ++v) w.views[v][i] = best > 0.0f ? w.views[v][i] / best : 0.0f;
  }
  finish_background(feat.renders, w);
  return w;
}

BlendWeights heuristic_weights(const BlendFeatures& feat, double sigma_d, double gamma_angle) {
  return HeuristicWeights({sigma_d, gamma_angle}).weights(feat);
}

std::unique_ptr<WeightProvider> make_weight_provider(BlendStrategy s, const BlendParams& params) {
  switch (s) {
    case BlendStrategy::kUniform:
      return std::make_unique<UniformWeights>();
    case BlendStrategy::kDistance:
      return std::make_unique<DistanceWeights>();
    case BlendStrategy::kHeuristic:
      return std::make_unique<HeuristicWeights>(params);
  }
  throw std::invalid_argument("unknown blend strategy");
}

Foreground blend_foreground(std::span<const SplatRender> renders, const BlendWeights& weights) {
  if (renders.size() != weights.views.size()) {
    throw std::invalid_argument("blend_foreground: renders and weights differ in count");
  }
  if (renders.empty()) throw std::invalid_argument("blend_foreground: no views");
  const int width = renders.front().color.width();
  const int height = renders.front().color.height();
  check_renders(renders, width, height);
  for (const ScalarMap& m : weights.views) require_same_size(m, renders.front().color, "blend");

  Foreground fg{ColorImage(width, height), ScalarMap(width, height, MapKind::kMask)};
  const size_t n = fg.color.size();
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) {
    Rgb sum;
    float denom = 0.0f;
    for (size_t k = 0; k < renders.size(); ++k) {
      const float alpha = renders[k].alpha[i];
      const float aw = alpha * weights.views[k][i];
      if (!(aw > 0.0f)) continue;
      // I_k is premultiplied: I_k / alpha_k * alpha_k * w_k = I_k * w_k.
      sum += renders[k].color[i] * weights.views[k][i];
      denom += aw;
    }
    if (denom < kHoleDenominator) {
      fg.holes[i] = 1.0f;
    } else {
      fg.color[i] = (sum * (1.0f / denom)).clamped();
    }
  }
  return fg;
}

ColorImage nearest_valid_fill(const Foreground& fg) {
  const int w = fg.color.width();
  const int h = fg.color.height();
  ColorImage out = fg.color;
  std::vector<char> done(out.size(), 0);
  std::deque<int> queue;
  for (size_t i = 0; i < out.size(); ++i) {
    if (fg.holes[i] == 0.0f) {
      done[i] = 1;
      queue.push_back(static_cast<int>(i));
    }
  }
  if (queue.empty()) return ColorImage(w, h);
  constexpr int kDx[4] = {1, -1, 0, 0};
  constexpr int kDy[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const int i = queue.front();
    queue.pop_front();
    const int x = i % w;
    const int y = i / w;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + kDx[d];
      const int ny = y + kDy[d];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      const int j = ny * w + nx;
      if (done[j]) continue;
      done[j] = 1;
      out[j] = out[i];
      queue.push_back(j);
    }
  }
  return out;
}

void finish_background(std::span<const SplatRender> renders, BlendWeights& weights) {
  if (renders.empty()) return;
  const int width = renders.front().color.width();
  const int height = renders.front().color.height();
  weights.background = ScalarMap(width, height, MapKind::kWeight);
  for (size_t i = 0; i < weights.background.size(); ++i) {
    float cover = 0.0f;
    for (size_t k = 0; k < renders.size(); ++k) cover += renders[k].alpha[i] * weights.views[k][i];
    weights.background[i] = std::clamp(1.0f - cover, 0.0f, 1.0f);
  }
  weights.background_image = nearest_valid_fill(blend_foreground(renders, weights));
}

ColorImage composite_background(const Foreground& fg, const BlendWeights& weights) {
  require_same_size(fg.color, weights.background, "composite_background");
  require_same_size(fg.color, weights.background_image, "composite_background");
  ColorImage out(fg.color.width(), fg.color.height());
  for (size_t i = 0; i < out.size(); ++i) {
    const Rgb& bg = weights.background_image[i];
    if (fg.holes[i] != 0.0f) {
      out[i] = bg;
      continue;
    }
    const float wb = std::clamp(weights.background[i], 0.0f, 1.0f);
    out[i] = (fg.color[i] * (1.0f - wb) + bg * wb).clamped();
  }
  return out;
}

double depth_blend_residual(const BlendWeights& weights, std::span<const SplatRender> renders,
                            const ScalarMap& tsdf_depth) {
  if (renders.size() != weights.views.size()) {
    throw std::invalid_argument("depth_blend_residual: renders and weights differ in count");
  }
  check_renders(renders, tsdf_depth.width(), tsdf_depth.height());
  double total = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < tsdf_depth.size(); ++i) {
    if (!valid_depth(tsdf_depth[i])) continue;
    double num = 0.0;
    double denom = 0.0;
    for (size_t k = 0; k < renders.size(); ++k) {
      if (!valid_depth(renders[k].depth[i])) continue;
      const double aw = static_cast<double>(renders[k].alpha[i]) * weights.views[k][i];
      num += renders[k].depth[i] * aw;
      denom += aw;
    }
    if (denom < kHoleDenominator) continue;
    total += std::fabs(tsdf_depth[i] - num / denom);
    ++count;
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

}  // namespace nvs
