// SPDX-License-Identifier: Apache-2.0
//
// Image-space truncated signed distance field. The field is never stored:
// at a world point p every input view contributes
//
//   s_k = z_k(p) - D_k[u_k, v_k]          (positive behind the surface)
//
// clamped to [-tau, tau] and weighted by a depth-noise confidence omega_k
// (zero when s_k < -tau). The previous frame's novel-view depth joins as one
// more view with weight omega_tmp. Rays from the target camera are marched
// through the fused field to find the first observed - to + transition.
#pragma once

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "nvs/camgeom.h"
#include "nvs/raster.h"

namespace nvs {

struct TsdfParams {
  double tau = 0.02;         // truncation, meters
  int window = 7;            // fusion-weight neighborhood, pixels (odd)
  double step_factor = 0.8;  // march step as a fraction of |s|
  int bisection_steps = 3;
  double eta = 15.0;         // cap on the temporal weight
  double beta_tmp = 1.0;     // temporal contribution scale
  double near = 0.1;         // meters
  double far = 100.0;        // meters
  bool normalize = true;     // divide the fused sum by the weight sum
  int skip_budget = 64;      // consecutive no-observation samples after the first observation
  double min_step_fraction = 0.25;  // step floor s_min = tau * min_step_fraction
  // Depth samples whose bilinear neighbors span more than depth_edge * tau
  // are unobserved (no surface interpolated across occlusion boundaries).
  // Non-positive disables the check.
  double depth_edge = 4.0;

  void validate() const;
  double min_step() const { return tau * min_step_fraction; }
  float edge_range() const;
};

struct DepthView {
  Camera camera;
  ScalarMap depth;
};

// Previous-frame novel-view depth fused as an extra observation. It is read
// at the target pixel of the ray being marched, so the target camera must be
// the one that rendered it.
struct TemporalDepth {
  Camera camera;                 // target camera (same as the one being marched)
  ScalarMap depth;               // previous novel-view depth
  ScalarMap novel_mask;          // difference mask splatted into the current target
  ScalarMap accumulated_weight;  // omega_acc on the current target grid
};

// Immutable per-frame bundle; precomputes one fusion-weight map per view and
// the per-pixel temporal weight.
class TsdfContext {
 public:
  TsdfContext(std::vector<DepthView> views, const TsdfParams& params,
              std::optional<TemporalDepth> temporal = std::nullopt);

  const TsdfParams& params() const { return params_; }
  const std::vector<DepthView>& views() const { return views_; }
  const ScalarMap& fusion_weights(int k) const { return weights_[k]; }
  const std::optional<TemporalDepth>& temporal() const { return temporal_; }
  // omega_tmp = min(beta_tmp * omega_acc * max(1 - M, 0), eta) per target pixel.
  const ScalarMap& temporal_weights() const { return temporal_weights_; }

 private:
  TsdfParams params_;
  std::vector<DepthView> views_;
  std::vector<ScalarMap> weights_;
  std::optional<TemporalDepth> temporal_;
  ScalarMap temporal_weights_;
};

// z_k(p) - D_k sampled bilinearly at the projection of p; std::nullopt when
// p is behind the camera, projects outside the image, hits invalid depth or
// straddles a depth step larger than `edge_range` meters.
std::optional<double> signed_distance(const Vec3& p, const Camera& cam, const ScalarMap& depth,
                                      float edge_range = std::numeric_limits<float>::infinity());

// omega = min(0.001 * (nu / w^2)^(-1/2), 1) with
// nu = sum over the w x w window of min((D_c - D_pq)^2, tau^2), centered on
// the pixel containing (u, v). Out-of-image and invalid neighbors contribute
// tau^2; an invalid or out-of-image center gives 0.
float fusion_weight(const ScalarMap& depth, double u, double v, const TsdfParams& params);

// fusion_weight evaluated at every pixel center.
ScalarMap fusion_weight_map(const ScalarMap& depth, const TsdfParams& params);

struct FusedSample {
  double s = 0.0;     // normalized (or raw, see TsdfParams::normalize) fused distance
  double wsum = 0.0;  // includes the temporal weight; 0 means no observation
  bool observed() const { return wsum > 0.0; }
};

// Effective weights of one evaluation, per view plus the temporal term.
struct SampleWeights {
  std::vector<float> views;
  float temporal = 0.0f;
};

// Fused value at p for the target ray through pixel (px, py); the pixel
// selects omega_tmp from the context.
FusedSample fused_tsdf(const Vec3& p, const TsdfContext& ctx, int px, int py,
                       SampleWeights* weights = nullptr);

// Weights recorded at each ray's surface hit.
struct HitWeights {
  std::vector<ScalarMap> views;
  ScalarMap temporal;
};

// omega_acc(t) = omega_tmp(t-1) + sum_k omega_k(t-1) per pixel, capped at
// 10 * eta. Zero everywhere when there is no previous frame.
ScalarMap update_accumulated_weight(const HitWeights* previous, int width, int height,
                                    double eta);

// Forward-splats each difference mask into the target (mask value as the
// Gaussian color) and takes the per-pixel maximum. Pixels no splat covers
// are 1 (unknown counts as dynamic).
ScalarMap splat_masks_to_target(std::span<const ScalarMap> masks, std::span<const Camera> cams,
                                std::span<const ScalarMap> depths, const Camera& target);

struct MarchResult {
  ScalarMap depth;    // novel-view depth, invalid where no surface was found
  ScalarMap hitmask;  // 1 at hits, 0 elsewhere
  HitWeights weights;
};

// Marches every target pixel. Production kernel: OpenMP over rows, each ray
// limited to a conservative per-pixel depth interval.
MarchResult raymarch_depth(const TsdfContext& ctx, const Camera& target);

// Outcome of one ray, exposed for tests.
struct PixelMarch {
  bool hit = false;
  double depth = 0.0;
  double bracket_near = 0.0;  // last sample in front of the surface
  double bracket_far = 0.0;   // first sample at or behind it
  int samples = 0;
};

// Marches the ray of pixel (px, py) over [z_begin, z_end] (target depth).
PixelMarch march_pixel(const TsdfContext& ctx, const Camera& target, int px, int py,
                       double z_begin, double z_end);

// Per-pixel [z_lo, z_hi] (target depth) containing every possible hit;
// pixels that cannot contain a hit have z_lo > z_hi.
struct MarchBounds {
  int width = 0;
  int height = 0;
  std::vector<float> z_lo;
  std::vector<float> z_hi;

  float lo(int px, int py) const { return z_lo[static_cast<size_t>(py) * width + px]; }
  float hi(int px, int py) const { return z_hi[static_cast<size_t>(py) * width + px]; }
};

MarchBounds compute_march_bounds(const TsdfContext& ctx, const Camera& target);

namespace reference {

// Serial march over the full [near, far] range of every pixel, evaluating
// the field through fused_tsdf().
MarchResult raymarch_depth(const TsdfContext& ctx, const Camera& target);

}  // namespace reference

}  // namespace nvs
