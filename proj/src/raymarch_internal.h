// SPDX-License-Identifier: Apache-2.0
//
// March loop shared by the production and reference ray marchers. `Eval` is
// any callable FusedSample(double z, SampleWeights*) giving the fused field at
// target depth z along one ray.
#pragma once

#include <algorithm>

#include "nvs/imgtsdf.h"

namespace nvs::detail {

template <typename Eval>
PixelMarch march_ray(const Eval& eval, double z_begin, double z_end, const TsdfParams& params,
                     SampleWeights* hit_weights) {
  PixelMarch out;
  if (!(z_begin <= z_end)) return out;

  const double free_step = params.step_factor * params.tau;
  bool prev_negative = false;  // previous sample observed with s < 0
  double neg_z = 0.0;
  double neg_s = 0.0;
  bool seen = false;
  int gap = 0;

  for (double z = z_begin; z <= z_end;) {
    const FusedSample f = eval(z, nullptr);
    ++out.samples;
    if (!f.observed()) {
      prev_negative = false;
      if (seen && ++gap > params.skip_budget) return out;
      z += free_step;
      continue;
    }
    seen = true;
    gap = 0;
    if (f.s < 0.0) {
      prev_negative = true;
      neg_z = z;
      neg_s = f.s;
      z += params.step_factor * std::max(-f.s, params.min_step());
      continue;
    }
    if (!prev_negative) {
      z += params.step_factor * std::max(f.s, params.min_step());
      continue;
    }

    // Observed - to + transition: refine inside [neg_z, z].
    double lo = neg_z, s_lo = neg_s, hi = z, s_hi = f.s;
    bool lo_observed = true;
    for (int i = 0; i < params.bisection_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      const FusedSample m = eval(mid, nullptr);
      ++out.samples;
      if (m.observed() && m.s >= 0.0) {
        hi = mid;
        s_hi = m.s;
      } else {
        lo = mid;
        s_lo = m.s;
        lo_observed = m.observed();
      }
    }
    double hit = 0.5 * (lo + hi);
    if (lo_observed && s_hi - s_lo > 0.0) hit = lo + (hi - lo) * (-s_lo) / (s_hi - s_lo);
    out.hit = true;
    out.depth = hit;
    out.bracket_near = neg_z;
    out.bracket_far = z;
    if (hit_weights) eval(hit, hit_weights);
    return out;
  }
  return out;
}

}  // namespace nvs::detail
