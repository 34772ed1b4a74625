// SPDX-License-Identifier: Apache-2.0
//
// Raster files: 8-bit RGB PNG for color, PFM for float depth, and 16-bit
// grayscale PNG depth import for external datasets.
//
// PFM layout written here: "Pf\n<width> <height>\n-1.0\n" followed by
// width*height little-endian float32 values, rows stored bottom to top.
#pragma once

#include <filesystem>

#include "nvs/raster.h"

namespace nvs {

// Grayscale and RGBA inputs are converted to RGB; 16-bit channels are
// scaled to [0, 1]. Throws std::runtime_error naming the path on failure.
ColorImage read_png(const std::filesystem::path& path);
// Rounds each channel to the nearest of 256 levels.
void write_png(const std::filesystem::path& path, const ColorImage& img);

// Reads "Pf" (one channel) files of either endianness; the result is tagged
// as a depth map.
ScalarMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const ScalarMap& map);

// 16-bit single-channel PNG depth, value * meters_per_unit (0 stays invalid).
ScalarMap read_png_depth(const std::filesystem::path& path, double meters_per_unit = 0.001);

}  // namespace nvs
