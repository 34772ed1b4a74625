// SPDX-License-Identifier: Apache-2.0
//
// Multi-view RGB-D sequence on disk:
//
//   <root>/<cam_id>/color_000000.png    8-bit RGB
//   <root>/<cam_id>/depth_000000.pfm    float meters, 0 = invalid
//
// A 16-bit PNG (depth_000000.png) is accepted instead of the PFM when the
// reader is given a millimeter (or other) scale.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nvs/camera_manifest.h"
#include "nvs/raster.h"

namespace nvs {

struct ViewFrame {
  std::string id;
  Camera camera;
  ColorImage color;
  ScalarMap depth;
};

std::filesystem::path color_path(const std::filesystem::path& root, const std::string& cam_id, int frame);
std::filesystem::path depth_path(const std::filesystem::path& root, const std::string& cam_id, int frame);

class DatasetReader {
 public:
  // png_depth_scale: meters per unit for 16-bit PNG depth fallback; unset
  // means PFM only.
  DatasetReader(std::filesystem::path root, std::vector<NamedCamera> cameras,
                std::optional<double> png_depth_scale = std::nullopt);

  const std::vector<NamedCamera>& cameras() const { return cameras_; }

  // Consecutive frames present for every camera, starting at 0.
  int frame_count() const;

  // Reads frame t of the given cameras (all when empty). Frames must be
  // requested in strictly increasing order. Throws std::runtime_error naming
  // the offending path on missing files or size mismatch.
  std::vector<ViewFrame> read_frame(int t, const std::vector<int>& views = {});

 private:
  std::filesystem::path root_;
  std::vector<NamedCamera> cameras_;
  std::optional<double> png_depth_scale_;
  int last_frame_ = -1;
};

// Writes one frame of one camera in the layout above.
void write_view_frame(const std::filesystem::path& root, const std::string& cam_id, int frame,
                      const ColorImage& color, const ScalarMap& depth);

}  // namespace nvs
