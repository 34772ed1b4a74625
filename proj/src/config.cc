// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <stdexcept>

#include "nvs/pipeline.h"

namespace nvs {

void PipelineConfig::validate() const {
  if (k < 1) throw std::invalid_argument("config: k must be >= 1");
  if (target_camera_id.empty() && trajectory.empty()) {
    throw std::invalid_argument("config: set target_camera_id or trajectory");
  }
  if (!target_camera_id.empty() && !trajectory.empty()) {
    throw std::invalid_argument("config: target_camera_id and trajectory are exclusive");
  }
  if (first_frame < 0) throw std::invalid_argument("config: first frame must be >= 0");
  if (frame_count < -1 || frame_count == 0) {
    throw std::invalid_argument("config: frame count must be positive or -1");
  }
  if (png_depth_scale && !(*png_depth_scale > 0.0)) {
    throw std::invalid_argument("config: png_depth_scale must be positive");
  }
  filter.validate();
  tsdf.validate();
  if (!(blend.sigma_d > 0.0)) throw std::invalid_argument("config: blend.sigma_d must be positive");
  if (!(blend.gamma_angle >= 0.0)) throw std::invalid_argument("config: blend.gamma_angle must be >= 0");
  if (!(splat.pixel_scale > 0.0)) throw std::invalid_argument("config: splat.pixel_scale must be positive");
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["dataset_root"] = c.dataset_root.string();
  j["manifest"] = c.manifest.string();
  j["output_dir"] = c.output_dir.string();
  j["target_camera_id"] = c.target_camera_id;
  j["trajectory"] = c.trajectory.string();
  j["k"] = c.k;
  j["frames"] = {{"first", c.first_frame}, {"count", c.frame_count}};
  j["filter"] = {{"beta", c.filter.beta}, {"lambda_t", c.filter.lambda_t}};
  j["tsdf"] = {{"tau", c.tsdf.tau},
               {"window", c.tsdf.window},
               {"step_factor", c.tsdf.step_factor},
               {"bisection_steps", c.tsdf.bisection_steps},
               {"eta", c.tsdf.eta},
               {"beta_tmp", c.tsdf.beta_tmp},
               {"near", c.tsdf.near},
               {"far", c.tsdf.far},
               {"normalize", c.tsdf.normalize},
               {"skip_budget", c.tsdf.skip_budget},
               {"min_step_fraction", c.tsdf.min_step_fraction},
               {"depth_edge", c.tsdf.depth_edge}};
  j["blend"] = {{"strategy", to_string(c.blend_strategy)},
                {"sigma_d", c.blend.sigma_d},
                {"gamma_angle", c.blend.gamma_angle}};
  j["splat"] = {{"pixel_scale", c.splat.pixel_scale}};
  j["temporal_filter"] = c.temporal_filter;
  j["temporal_tsdf"] = c.temporal_tsdf;
  j["png_depth_scale"] = c.png_depth_scale ? nlohmann::json(*c.png_depth_scale) : nlohmann::json(nullptr);
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c) {
  auto path = [&](const char* key, std::filesystem::path& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
  };
  path("dataset_root", c.dataset_root);
  path("manifest", c.manifest);
  path("output_dir", c.output_dir);
  path("trajectory", c.trajectory);
  c.target_camera_id = j.value("target_camera_id", c.target_camera_id);
  c.k = j.value("k", c.k);
  if (j.contains("frames")) {
    const auto& f = j.at("frames");
    c.first_frame = f.value("first", c.first_frame);
    c.frame_count = f.value("count", c.frame_count);
  }
  if (j.contains("filter")) {
    const auto& f = j.at("filter");
    c.filter.beta = f.value("beta", c.filter.beta);
    c.filter.lambda_t = f.value("lambda_t", c.filter.lambda_t);
  }
  if (j.contains("tsdf")) {
    const auto& t = j.at("tsdf");
    c.tsdf.tau = t.value("tau", c.tsdf.tau);
    c.tsdf.window = t.value("window", c.tsdf.window);
    c.tsdf.step_factor = t.value("step_factor", c.tsdf.step_factor);
    c.tsdf.bisection_steps = t.value("bisection_steps", c.tsdf.bisection_steps);
    c.tsdf.eta = t.value("eta", c.tsdf.eta);
    c.tsdf.beta_tmp = t.value("beta_tmp", c.tsdf.beta_tmp);
    c.tsdf.near = t.value("near", c.tsdf.near);
    c.tsdf.far = t.value("far", c.tsdf.far);
    c.tsdf.normalize = t.value("normalize", c.tsdf.normalize);
    c.tsdf.skip_budget = t.value("skip_budget", c.tsdf.skip_budget);
    c.tsdf.min_step_fraction = t.value("min_step_fraction", c.tsdf.min_step_fraction);
    c.tsdf.depth_edge = t.value("depth_edge", c.tsdf.depth_edge);
  }
  if (j.contains("blend")) {
    const auto& b = j.at("blend");
    if (b.contains("strategy")) c.blend_strategy = parse_blend_strategy(b.at("strategy").get<std::string>());
    c.blend.sigma_d = b.value("sigma_d", c.blend.sigma_d);
    c.blend.gamma_angle = b.value("gamma_angle", c.blend.gamma_angle);
  }
  if (j.contains("splat")) c.splat.pixel_scale = j.at("splat").value("pixel_scale", c.splat.pixel_scale);
  c.temporal_filter = j.value("temporal_filter", c.temporal_filter);
  c.temporal_tsdf = j.value("temporal_tsdf", c.temporal_tsdf);
  if (j.contains("png_depth_scale")) {
    const auto& s = j.at("png_depth_scale");
    c.png_depth_scale = s.is_null() ? std::nullopt : std::optional<double>(s.get<double>());
  }
  return c;
}

PipelineConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  PipelineConfig c;
  try {
    c = config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  // Relative paths are relative to the config file.
  const auto base = path.parent_path();
  for (std::filesystem::path* p : {&c.dataset_root, &c.manifest, &c.output_dir, &c.trajectory}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return c;
}

}  // namespace nvs
