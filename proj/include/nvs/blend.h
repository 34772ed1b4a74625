// SPDX-License-Identifier: Apache-2.0
//
// Depth-guided blending of forward-rendered views. A weight provider maps
// per-pixel features to one weight map per view plus a background weight;
// the foreground is the normalized weighted mean of the un-premultiplied
// view colors and the background fills disocclusions.
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nvs/camgeom.h"
#include "nvs/raster.h"
#include "nvs/splat.h"

namespace nvs {

// Geometric features of one input view relative to the target.
struct ViewFeatures {
  ScalarMap normal_dot;  // dot(surface -> input camera, surface normal)
  ScalarMap ray_dot;     // dot(input-view ray, target ray)
  double camera_distance = 0.0;
  double axis_dot = 0.0;  // dot(input forward, target forward)
};

// Non-owning view of the renders and TSDF depth plus the derived features.
// The referenced rasters must outlive the features.
struct BlendFeatures {
  std::span<const SplatRender> renders;
  const ScalarMap* tsdf_depth = nullptr;
  std::vector<ViewFeatures> views;

  int num_views() const { return static_cast<int>(views.size()); }
  int width() const { return tsdf_depth ? tsdf_depth->width() : 0; }
  int height() const { return tsdf_depth ? tsdf_depth->height() : 0; }
};

// Throws std::invalid_argument when sizes or counts disagree.
BlendFeatures compute_features(std::span<const SplatRender> renders, const Camera& target,
                               const ScalarMap& tsdf_depth, std::span<const Camera> src_cams);

// Channel-major tensor of 9K+1 planes, each width*height floats: per view
// color (3), depth, alpha, normal_dot, ray_dot, camera_distance, axis_dot;
// then the TSDF depth.
std::vector<float> feature_tensor(const BlendFeatures& feat);

struct BlendWeights {
  std::vector<ScalarMap> views;  // w_k in [0, 1]
  ScalarMap background;          // w_BG in [0, 1]
  ColorImage background_image;   // I_BG
};

struct BlendParams {
  double sigma_d = 0.04;     // meters; twice the TSDF truncation
  double gamma_angle = 2.0;
};

enum class BlendStrategy { kUniform, kDistance, kHeuristic };

std::string to_string(BlendStrategy s);
// Throws std::invalid_argument for unknown names.
BlendStrategy parse_blend_strategy(const std::string& name);

class WeightProvider {
 public:
  virtual ~WeightProvider() = default;
  virtual BlendWeights weights(const BlendFeatures& feat) const = 0;
};

// w_k = 1 for every view.
class UniformWeights : public WeightProvider {
 public:
  BlendWeights weights(const BlendFeatures& feat) const override;
};

// w_k from inverse camera distance, max-normalized; ignores geometry.
class DistanceWeights : public WeightProvider {
 public:
  BlendWeights weights(const BlendFeatures& feat) const override;
};

// w_k ~ exp(-|D_k - D| / sigma_d) * max(ray_dot, 0)^gamma * alpha_k,
// max-normalized per pixel.
class HeuristicWeights : public WeightProvider {
 public:
  explicit HeuristicWeights(BlendParams params = {});
  BlendWeights weights(const BlendFeatures& feat) const override;

 private:
  BlendParams params_;
};

std::unique_ptr<WeightProvider> make_weight_provider(BlendStrategy s, const BlendParams& params);

BlendWeights heuristic_weights(const BlendFeatures& feat, double sigma_d, double gamma_angle);

// Foreground image plus a hole map (1 where sum alpha_k w_k < 1e-6).
struct Foreground {
  ColorImage color;
  ScalarMap holes;
};

// sum_k c_k alpha_k w_k / sum_k alpha_k w_k with c_k = I_k / alpha_k.
// Only renders and view weight maps are read.
Foreground blend_foreground(std::span<const SplatRender> renders, const BlendWeights& weights);

// (1 - w_BG) * fg + w_BG * I_BG; holes take I_BG.
ColorImage composite_background(const Foreground& fg, const BlendWeights& weights);

// Nearest non-hole pixel (4-connected breadth-first) color for every pixel;
// non-hole pixels keep their own color. All black when everything is a hole.
ColorImage nearest_valid_fill(const Foreground& fg);

// Background weight max(0, 1 - sum_k alpha_k w_k) and background image from
// the foreground; completes weights whose view maps are already set.
void finish_background(std::span<const SplatRender> renders, BlendWeights& weights);

// Mean |D - sum_k D_k alpha_k w_k / sum_k alpha_k w_k| in meters over pixels
// where the TSDF depth and at least one view depth are valid; 0 if none.
double depth_blend_residual(const BlendWeights& weights, std::span<const SplatRender> renders,
                            const ScalarMap& tsdf_depth);

}  // namespace nvs
