// SPDX-License-Identifier: Apache-2.0
#include "nvs/tempfilter.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvs {

void FilterParams::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in [0, 1]");
  if (!(lambda_t > 0.0)) throw std::invalid_argument("lambda_t must be positive");
}

ScalarMap difference_mask(const ColorImage& cur, const ColorImage& prev,
                          const FilterParams& params) {
  params.validate();
  require_same_size(cur, prev, "difference_mask");

  ScalarMap diff(cur.width(), cur.height(), MapKind::kWeight);
  const size_t n = cur.size();
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) {
    const Rgb& a = cur[i];
    const Rgb& b = prev[i];
    diff[i] = (std::fabs(a.r - b.r) + std::fabs(a.g - b.g) + std::fabs(a.b - b.b)) / 3.0f;
  }

  ScalarMap quarter = downscale_quarter(diff);
  ScalarMap mask(quarter.width(), quarter.height(), MapKind::kMask);
  const float inv_lambda = static_cast<float>(1.0 / params.lambda_t);
  const float beta = static_cast<float>(params.beta);
  for (size_t i = 0; i < quarter.size(); ++i) {
    mask[i] = std::min(quarter[i] * inv_lambda + beta, 1.0f);
  }
  return upscale_bilinear(maxpool3(mask), cur.width(), cur.height());
}

ScalarMap filter_depth(const ScalarMap& cur_depth, const ScalarMap& mask,
                       const std::optional<ViewTemporalState>& state) {
  require_same_size(cur_depth, mask, "filter_depth");
  if (!state || state->prev_filtered_depth.empty()) return cur_depth;
  const ScalarMap& prev = state->prev_filtered_depth;
  require_same_size(cur_depth, prev, "filter_depth");

  ScalarMap out(cur_depth.width(), cur_depth.height(), MapKind::kDepth);
  const size_t n = cur_depth.size();
#pragma omp parallel for schedule(static)
  for (size_t i = 0; i < n; ++i) {
    const float d = cur_depth[i];
    const float p = prev[i];
    if (!valid_depth(d)) {
      out[i] = valid_depth(p) ? p : kInvalidDepth;
    } else if (!valid_depth(p)) {
      out[i] = d;
    } else {
      const float m = std::clamp(mask[i], 0.0f, 1.0f);
      out[i] = std::clamp(m * d + (1.0f - m) * p, std::min(d, p), std::max(d, p));
    }
  }
  return out;
}

}  // namespace nvs
