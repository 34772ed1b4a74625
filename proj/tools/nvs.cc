// SPDX-License-Identifier: Apache-2.0
//
// nvs render | synth | eval | oracle
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nvs/image_io.h"
#include "nvs/metrics.h"
#include "nvs/pipeline.h"
#include "nvs/scenegen.h"

namespace fs = std::filesystem;

namespace {

struct RenderArgs {
  std::string config;
  std::string dataset, manifest, output, target, trajectory, blend;
  std::optional<int> k, first, count;
  std::optional<double> tau, png_depth_scale, beta_tmp;
  bool no_temporal_filter = false;
  bool no_temporal_tsdf = false;
};

int run_render(const RenderArgs& a) {
  nvs::PipelineConfig cfg;
  if (!a.config.empty()) cfg = nvs::read_config(a.config);
  if (!a.dataset.empty()) cfg.dataset_root = a.dataset;
  if (!a.manifest.empty()) cfg.manifest = a.manifest;
  if (!a.output.empty()) cfg.output_dir = a.output;
  if (!a.target.empty()) {
    cfg.target_camera_id = a.target;
    cfg.trajectory.clear();
  }
  if (!a.trajectory.empty()) {
    cfg.trajectory = a.trajectory;
    cfg.target_camera_id.clear();
  }
  if (!a.blend.empty()) cfg.blend_strategy = nvs::parse_blend_strategy(a.blend);
  if (a.k) cfg.k = *a.k;
  if (a.first) cfg.first_frame = *a.first;
  if (a.count) cfg.frame_count = *a.count;
  if (a.tau) cfg.tsdf.tau = *a.tau;
  if (a.beta_tmp) cfg.tsdf.beta_tmp = *a.beta_tmp;
  if (a.png_depth_scale) cfg.png_depth_scale = *a.png_depth_scale;
  if (a.no_temporal_filter) cfg.temporal_filter = false;
  if (a.no_temporal_tsdf) cfg.temporal_tsdf = false;
  if (cfg.output_dir.empty()) throw std::invalid_argument("render: no output directory");

  const nvs::SequenceReport report = nvs::run_sequence(cfg);
  const nlohmann::json summary = nvs::summary_to_json(report);
  std::cout << summary.dump(2) << '\n';
  return 0;
}

struct SynthArgs {
  std::string scene, out;
  double sigma = 0.0;
  double dropout = 0.0;
  uint64_t seed = 0;
  std::vector<std::string> clean;  // cameras written without noise
};

int run_synth(const SynthArgs& a) {
  const nvs::SceneSpec spec = nvs::read_scene(a.scene);
  const nvs::NoiseSpec noise{a.sigma, a.dropout, a.seed};
  noise.validate();
  const fs::path root(a.out);
  fs::create_directories(root);
  for (int t = 0; t < spec.frames; ++t) {
    for (size_t i = 0; i < spec.rig.size(); ++i) {
      const nvs::NamedCamera& cam = spec.rig[i];
      nvs::RenderedFrame f = nvs::render_scene(spec, cam.camera, t);
      const bool clean = std::find(a.clean.begin(), a.clean.end(), cam.id) != a.clean.end();
      if (!clean) f.depth = nvs::add_noise(f.depth, noise, static_cast<uint64_t>(t) * spec.rig.size() + i);
      nvs::write_view_frame(root, cam.id, t, f.color, f.depth);
    }
  }
  nvs::write_camera_manifest(root / "cameras.json", spec.rig);
  std::printf("wrote %d frames x %zu cameras to %s\n", spec.frames, spec.rig.size(), root.c_str());
  return 0;
}

std::string frame_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "color_%06d.png", t);
  return buf;
}

// Frames 0, 1, ... present in both directories.
int common_frames(const fs::path& a, const fs::path& b) {
  int t = 0;
  while (fs::exists(a / frame_name(t)) && fs::exists(b / frame_name(t))) ++t;
  return t;
}

struct EvalArgs {
  std::vector<std::string> rendered, gt;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  if (a.rendered.size() != a.gt.size() || a.rendered.empty()) {
    throw std::invalid_argument("eval: give one --gt per --rendered directory");
  }
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw std::runtime_error("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  std::vector<double> per_view_l1;
  for (size_t v = 0; v < a.rendered.size(); ++v) {
    const int n = common_frames(a.rendered[v], a.gt[v]);
    if (n == 0) throw std::runtime_error("no common frames in " + a.rendered[v] + " and " + a.gt[v]);
    nvs::SequenceReport report;
    std::vector<nvs::ColorImage> rendered, truth;
    for (int t = 0; t < n; ++t) {
      rendered.push_back(nvs::read_png(fs::path(a.rendered[v]) / frame_name(t)));
      truth.push_back(nvs::read_png(fs::path(a.gt[v]) / frame_name(t)));
      nvs::FrameRecord r;
      r.frame = t;
      r.psnr = nvs::psnr(rendered.back(), truth.back());
      r.ssim = nvs::ssim(rendered.back(), truth.back());
      r.l1 = nvs::l1(rendered.back(), truth.back());
      nlohmann::json j = nvs::frame_to_json(r);
      j["view"] = v;
      j.erase("timing_ms");
      j.erase("depth_blend_residual");
      j.erase("hit_fraction");
      out << j.dump() << '\n';
      report.frames.push_back(r);
    }
    report.sdt = nvs::sdt(rendered, truth);
    if (n >= 2) report.tcc = nvs::tcc(rendered, truth);
    per_view_l1.push_back(*report.mean_l1());
    nlohmann::json s = nvs::summary_to_json(report);
    s["view"] = v;
    s.erase("timing_ms");
    if (v + 1 == a.rendered.size() && a.rendered.size() > 1) s["sdv"] = nvs::sdv(per_view_l1);
    out << s.dump() << '\n';
  }
  return 0;
}

struct OracleArgs {
  std::string scene, target, out;
  std::vector<std::string> views;
  int frame = 0;
  double voxel = 0.005;
  double tau = 0.02;
  int max_dim = 192;
};

int run_oracle(const OracleArgs& a) {
  const nvs::SceneSpec spec = nvs::read_scene(a.scene);
  const int ti = nvs::find_camera(spec.rig, a.target);
  std::vector<std::pair<nvs::Camera, nvs::ScalarMap>> views;
  for (size_t i = 0; i < spec.rig.size(); ++i) {
    const bool wanted = a.views.empty() ? static_cast<int>(i) != ti
                                        : std::find(a.views.begin(), a.views.end(), spec.rig[i].id) !=
                                              a.views.end();
    if (!wanted) continue;
    views.emplace_back(spec.rig[i].camera, nvs::render_scene(spec, spec.rig[i].camera, a.frame).depth);
  }
  if (views.empty()) throw std::invalid_argument("oracle: no input views");
  nvs::VoxelOracleParams p;
  p.voxel = a.voxel;
  p.tau = a.tau;
  p.max_dim = a.max_dim;
  nvs::write_pfm(a.out, nvs::voxel_tsdf_oracle(views, spec.rig[ti].camera, p));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming novel-view synthesis from multi-view RGB-D video"};
  app.require_subcommand(1);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render a dataset into novel views");
  render->add_option("-c,--config", ra.config, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  render->add_option("--dataset", ra.dataset, "Dataset root");
  render->add_option("--manifest", ra.manifest, "Camera manifest");
  render->add_option("-o,--output", ra.output, "Output directory");
  render->add_option("--target", ra.target, "Held-out rig camera used as target");
  render->add_option("--trajectory", ra.trajectory, "Manifest of per-frame target cameras");
  render->add_option("-k,--views", ra.k, "Input views per frame");
  render->add_option("--first", ra.first, "First frame");
  render->add_option("--count", ra.count, "Number of frames (-1: all)");
  render->add_option("--blend", ra.blend, "uniform | distance | heuristic");
  render->add_option("--tau", ra.tau, "TSDF truncation, meters");
  render->add_option("--beta-tmp", ra.beta_tmp, "Temporal TSDF contribution scale");
  render->add_option("--png-depth-scale", ra.png_depth_scale, "Meters per unit of 16-bit PNG depth");
  render->add_flag("--no-temporal-filter", ra.no_temporal_filter, "Disable input depth filtering");
  render->add_flag("--no-temporal-tsdf", ra.no_temporal_tsdf, "Disable previous-frame depth fusion");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Export a synthetic scene as a dataset");
  synth->add_option("scene", sa.scene, "Scene file (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("-o,--output", sa.out, "Dataset root")->required();
  synth->add_option("--sigma", sa.sigma, "Depth noise std, meters");
  synth->add_option("--dropout", sa.dropout, "Fraction of depth pixels dropped");
  synth->add_option("--seed", sa.seed, "Noise seed");
  synth->add_option("--clean", sa.clean, "Cameras written without noise (ground truth)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Compare rendered frames with ground truth");
  eval->add_option("--rendered", ea.rendered, "Directory of color_%06d.png (repeat per view)")->required();
  eval->add_option("--gt", ea.gt, "Ground-truth directory (repeat per view)")->required();
  eval->add_option("-o,--output", ea.out, "Report file (default stdout)");

  OracleArgs oa;
  auto* oracle = app.add_subcommand("oracle", "Voxel-grid reference depth for one frame");
  oracle->add_option("scene", oa.scene, "Scene file (JSON)")->required()->check(CLI::ExistingFile);
  oracle->add_option("--target", oa.target, "Target camera id")->required();
  oracle->add_option("--views", oa.views, "Input camera ids (default: all others)");
  oracle->add_option("--frame", oa.frame, "Frame index");
  oracle->add_option("--voxel", oa.voxel, "Voxel size, meters");
  oracle->add_option("--tau", oa.tau, "Truncation, meters");
  oracle->add_option("--max-dim", oa.max_dim, "Largest grid size per axis");
  oracle->add_option("-o,--output", oa.out, "Output depth (PFM)")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*render) return run_render(ra);
    if (*synth) return run_synth(sa);
    if (*eval) return run_eval(ea);
    if (*oracle) return run_oracle(oa);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nvs: %s\n", e.what());
    return 1;
  }
  return 0;
}
