// SPDX-License-Identifier: Apache-2.0
//
// Per-frame orchestration: temporal filtering of the input depths, image-
// space TSDF ray marching, Gaussian forward warping and depth-guided
// blending, plus the sequence driver that reads a dataset and writes images,
// depth maps and a metrics report.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvs/blend.h"
#include "nvs/camera_manifest.h"
#include "nvs/dataset.h"
#include "nvs/imgtsdf.h"
#include "nvs/raster.h"
#include "nvs/report.h"
#include "nvs/splat.h"
#include "nvs/tempfilter.h"

namespace nvs {

struct PipelineConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  // Held-out rig camera used as the target; its frames, when present, are
  // the ground truth.
  std::string target_camera_id;
  // Alternative to target_camera_id: a camera manifest whose cameras are the
  // per-frame targets (a single camera is used for every frame).
  std::filesystem::path trajectory;
  int k = 4;
  FilterParams filter;
  TsdfParams tsdf;
  BlendParams blend;
  SplatParams splat;
  bool temporal_filter = true;
  bool temporal_tsdf = true;
  BlendStrategy blend_strategy = BlendStrategy::kHeuristic;
  int first_frame = 0;
  int frame_count = -1;  // -1: every available frame
  std::optional<double> png_depth_scale;  // meters per unit for 16-bit PNG depth
  bool write_outputs = true;

  // Throws std::invalid_argument on inconsistent settings (file existence is
  // checked when the run starts).
  void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Keys missing from `j` keep the values already in `base`.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig read_config(const std::filesystem::path& path);

// State carried from frame t-1 to frame t. Input-view state is keyed by
// camera id so that view selection may change between frames.
struct FrameState {
  std::map<std::string, ViewTemporalState> views;
  std::optional<Camera> target;  // target camera of the previous frame
  ScalarMap novel_depth;         // previous novel-view depth
  std::optional<HitWeights> hit_weights;
  ScalarMap accumulated_weight;

  bool empty() const { return views.empty() && !target; }
};

inline const std::vector<std::string> kStageNames = {"filter", "mask-splat", "tsdf", "splat",
                                                     "blend"};

struct FrameDiagnostics {
  std::vector<StageTime> stages;  // kStageNames order
  double depth_blend_residual = 0.0;
  double hit_fraction = 0.0;  // fraction of target pixels with a TSDF hit
};

struct FrameOutput {
  ColorImage color;
  ScalarMap depth;
  FrameDiagnostics diagnostics;
  FrameState state;
};

// Runs one frame. `inputs` are the selected input views; `state` is the
// value returned for the previous frame (empty at t = 0).
FrameOutput run_frame(const std::vector<ViewFrame>& inputs, const Camera& target,
                      const FrameState& state, const PipelineConfig& cfg);

// Reads the dataset, runs every frame, writes color_%06d.png /
// depth_%06d.pfm and report.jsonl into cfg.output_dir (when
// cfg.write_outputs) and returns the report.
SequenceReport run_sequence(const PipelineConfig& cfg);

}  // namespace nvs
