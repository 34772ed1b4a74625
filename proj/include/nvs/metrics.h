// SPDX-License-Identifier: Apache-2.0
//
// Image quality and consistency metrics. PSNR and SSIM work on [0, 1]
// colors; L1 and the L1-based spreads (SDT, SDV) are reported on the 0-255
// scale.
#pragma once

#include <span>
#include <vector>

#include "nvs/raster.h"

namespace nvs {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) over all pixels and channels; kPsnrCap when MSE is 0.
double psnr(const ColorImage& a, const ColorImage& b);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5) truncated at the
// image border and renormalized, C1 = 0.01^2, C2 = 0.03^2, mean over all
// pixels, averaged over the three channels.
double ssim(const ColorImage& a, const ColorImage& b);

// Mean absolute difference over pixels and channels, 0-255 scale.
double l1(const ColorImage& a, const ColorImage& b);

// Mean over t of SSIM(|R_t - R_t+1|, |G_t - G_t+1|). Throws with fewer than
// two frames or mismatched sequences.
double tcc(std::span<const ColorImage> rendered, std::span<const ColorImage> gt);

// Population standard deviation; 0 for fewer than two values.
double population_std(std::span<const double> values);

// Spread of the per-frame L1 error over time.
double sdt(std::span<const ColorImage> rendered, std::span<const ColorImage> gt);

// Spread of per-view L1 errors.
double sdv(std::span<const double> per_view_l1);

// Mean absolute difference between two depth maps over pixels valid in both,
// in meters; 0 when no pixel qualifies.
double depth_l1(const ScalarMap& a, const ScalarMap& b);

}  // namespace nvs
