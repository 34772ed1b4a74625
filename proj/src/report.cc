// SPDX-License-Identifier: Apache-2.0
#include "nvs/report.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace nvs {

namespace {

template <typename Get>
std::optional<double> mean_of(const std::vector<FrameRecord>& frames, Get get) {
  double sum = 0.0;
  int n = 0;
  for (const FrameRecord& f : frames) {
    if (const auto v = get(f)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::optional<double> SequenceReport::mean_psnr() const {
  return mean_of(frames, [](const FrameRecord& f) { return f.psnr; });
}
std::optional<double> SequenceReport::mean_ssim() const {
  return mean_of(frames, [](const FrameRecord& f) { return f.ssim; });
}
std::optional<double> SequenceReport::mean_l1() const {
  return mean_of(frames, [](const FrameRecord& f) { return f.l1; });
}

double percentile95(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t rank = static_cast<size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  return sorted[std::max<size_t>(rank, 1) - 1];
}

std::vector<StageSummary> SequenceReport::timing() const {
  std::vector<StageSummary> out;
  if (frames.empty()) return out;
  for (const StageTime& s : frames.front().stages) {
    std::vector<double> ms;
    for (const FrameRecord& f : frames) {
      for (const StageTime& t : f.stages) {
        if (t.name == s.name) ms.push_back(t.ms);
      }
    }
    double mean = 0.0;
    for (double v : ms) mean += v;
    mean /= static_cast<double>(ms.size());
    out.push_back({s.name, mean, percentile95(ms)});
  }
  return out;
}

nlohmann::json frame_to_json(const FrameRecord& r) {
  nlohmann::json timing = nlohmann::json::object();
  for (const StageTime& s : r.stages) timing[s.name] = s.ms;
  return {{"type", "frame"},
          {"frame", r.frame},
          {"psnr", optional_json(r.psnr)},
          {"ssim", optional_json(r.ssim)},
          {"l1", optional_json(r.l1)},
          {"depth_blend_residual", r.depth_blend_residual},
          {"hit_fraction", r.hit_fraction},
          {"timing_ms", timing}};
}

nlohmann::json summary_to_json(const SequenceReport& r) {
  nlohmann::json timing = nlohmann::json::object();
  for (const StageSummary& s : r.timing()) timing[s.name] = {{"mean", s.mean_ms}, {"p95", s.p95_ms}};
  return {{"type", "summary"},
          {"frames", r.frames.size()},
          {"psnr_mean", optional_json(r.mean_psnr())},
          {"ssim_mean", optional_json(r.mean_ssim())},
          {"l1_mean", optional_json(r.mean_l1())},
          {"tcc", optional_json(r.tcc)},
          {"sdt", optional_json(r.sdt)},
          {"sdv", optional_json(r.sdv)},
          {"lpips", "not computed"},
          {"sted", "not computed"},
          {"timing_ms", timing}};
}

void write_report(const std::filesystem::path& path, const SequenceReport& r) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  for (const FrameRecord& f : r.frames) out << frame_to_json(f).dump() << '\n';
  out << summary_to_json(r).dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace nvs
