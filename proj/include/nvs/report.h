// SPDX-License-Identifier: Apache-2.0
//
// Metrics and timing report, written as JSON Lines: one "frame" record per
// frame followed by one "summary" record.
//
//   {"type":"frame","frame":0,"psnr":31.2,"ssim":0.93,"l1":4.1,
//    "depth_blend_residual":0.003,"hit_fraction":0.98,
//    "timing_ms":{"filter":1.2,"mask-splat":0.0,"tsdf":410.5,"splat":180.2,"blend":60.3}}
//   {"type":"summary","frames":10,"psnr_mean":...,"ssim_mean":...,"l1_mean":...,
//    "tcc":...,"sdt":...,"sdv":null,"lpips":"not computed","sted":"not computed",
//    "timing_ms":{"tsdf":{"mean":...,"p95":...},...}}
//
// Quality fields are null when no ground truth was available.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nvs {

struct StageTime {
  std::string name;
  double ms = 0.0;
};

struct FrameRecord {
  int frame = 0;
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<double> l1;
  double depth_blend_residual = 0.0;
  double hit_fraction = 0.0;
  std::vector<StageTime> stages;
};

struct StageSummary {
  std::string name;
  double mean_ms = 0.0;
  double p95_ms = 0.0;
};

struct SequenceReport {
  std::vector<FrameRecord> frames;
  std::optional<double> tcc;
  std::optional<double> sdt;
  std::optional<double> sdv;

  std::optional<double> mean_psnr() const;
  std::optional<double> mean_ssim() const;
  std::optional<double> mean_l1() const;
  std::vector<StageSummary> timing() const;
};

// Nearest-rank 95th percentile; 0 for an empty list.
double percentile95(std::span<const double> values);

nlohmann::json frame_to_json(const FrameRecord& r);
nlohmann::json summary_to_json(const SequenceReport& r);
void write_report(const std::filesystem::path& path, const SequenceReport& r);

}  // namespace nvs
