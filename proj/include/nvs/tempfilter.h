// SPDX-License-Identifier: Apache-2.0
//
// Temporal stabilization of input-view depth. Cameras are static over time,
// so a soft per-pixel color-change mask M says how much of the current depth
// to take:  D'(t) = M * D(t) + (1 - M) * D'(t-1).
#pragma once

#include <optional>

#include "nvs/raster.h"

namespace nvs {

struct FilterParams {
  double beta = 0.6;      // mask floor for unchanged pixels
  double lambda_t = 0.7;  // color change that saturates the mask

  void validate() const;
};

struct ViewTemporalState {
  ColorImage prev_color;
  ScalarMap prev_filtered_depth;
};

// M = min(mean_rgb|cur - prev| / lambda_t + beta, 1), evaluated on the 4x4
// box-averaged absolute difference, then 3x3 max-pooled and bilinearly
// upscaled back to full resolution.
ScalarMap difference_mask(const ColorImage& cur, const ColorImage& prev,
                          const FilterParams& params);

// Per-pixel convex blend of the current depth and the previous filtered
// depth. An invalid side yields the other; with no state (first frame) the
// current depth is returned unchanged.
ScalarMap filter_depth(const ScalarMap& cur_depth, const ScalarMap& mask,
                       const std::optional<ViewTemporalState>& state);

}  // namespace nvs
