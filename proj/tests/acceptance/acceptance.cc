// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
// when any selected criterion fails.
//
//   nvs_acceptance [--fixtures DIR] [--unit-tests EXE] [criterion ...]
//
// Criteria are 1..9; with none given all of them run.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvs/blend.h"
#include "nvs/imgtsdf.h"
#include "nvs/metrics.h"
#include "nvs/pipeline.h"
#include "nvs/scenegen.h"
#include "nvs/splat.h"
#include "nvs/tempfilter.h"
#include "scenes.h"

namespace fs = std::filesystem;
using namespace nvs;
using nvs::testing::camera_at;

namespace {

struct Line {
  std::string id;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Image-space field vs. explicit voxel grid on three scenes.
std::vector<Line> oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec3 at(0, 0, 2);
  const auto cams = nvs::testing::rig(2, 0.2, at, 320, 240, 300);
  const Camera target = camera_at(Vec3(0.02, 0.04, 0), at, 320, 240, 300);
  const TsdfParams params;
  const VoxelOracleParams vp;
  const double tol = std::max(params.tau, 2 * vp.voxel);

  struct Named {
    const char* name;
    SceneSpec spec;
  };
  const std::vector<Named> scenes = {{"plane", nvs::testing::plane_scene()},
                                     {"sphere", nvs::testing::sphere_scene(0.3)},
                                     {"plane+box", nvs::testing::plane_box_scene()}};
  bool pass = true;
  std::string detail;
  for (const Named& s : scenes) {
    const auto views = nvs::testing::render_depth_views(s.spec, cams);
    std::vector<std::pair<Camera, ScalarMap>> pairs;
    for (const DepthView& v : views) pairs.emplace_back(v.camera, v.depth);
    const MarchResult img = raymarch_depth(TsdfContext(views, params), target);
    const ScalarMap vox = voxel_tsdf_oracle(pairs, target, vp);
    size_t hits = 0;
    size_t agree = 0;
    for (size_t i = 0; i < img.depth.size(); ++i) {
      if (!valid_depth(img.depth[i])) continue;
      ++hits;
      if (valid_depth(vox[i]) && std::fabs(img.depth[i] - vox[i]) <= tol) ++agree;
    }
    const double frac = hits ? static_cast<double>(agree) / hits : 0.0;
    pass = pass && hits > 0 && frac >= 0.99;
    detail += fmt("%s %.4f of %zu hits; ", s.name, frac, hits);
  }
  const double secs = seconds_since(t0);
  pass = pass && secs < 60.0;
  detail += fmt("%.1f s (need >= 0.99 within %.3f m, < 60 s)", secs, tol);
  return {{"1", pass, detail}};
}

// 2. Plane within 2 mm at every hit, sphere within 5 mm over 98% of its disk.
std::vector<Line> analytic_depth() {
  std::vector<Line> out;
  {
    const Camera cam = nvs::testing::axis_camera(320, 240, 300);
    const SceneSpec spec = nvs::testing::plane_scene(2.0, 2.0);  // fills the view
    const ScalarMap depth = render_scene(spec, cam, 0).depth;
    const MarchResult r = raymarch_depth(TsdfContext({{cam, depth}}, TsdfParams{}), cam);
    size_t hits = 0;
    double worst = 0.0;
    for (size_t i = 0; i < r.depth.size(); ++i) {
      if (!valid_depth(r.depth[i])) continue;
      ++hits;
      worst = std::max(worst, std::fabs(r.depth[i] - 2.0));
    }
    const bool pass = hits == r.depth.size() && worst <= 0.002;
    out.push_back({"2a", pass,
                   fmt("plane: %zu/%zu hits, max |err| %.5f m (need every pixel hit, <= 0.002)",
                       hits, r.depth.size(), worst)});
  }
  {
    const Vec3 center(0, 0, 2);
    const double radius = 0.5;
    const SceneSpec spec = nvs::testing::sphere_scene(radius, center);
    // Two views 10 degrees apart on a 2 m circle around the sphere, target midway.
    auto on_circle = [&](double deg) {
      const double a = deg * M_PI / 180.0;
      return camera_at(center + 2.0 * Vec3(std::sin(a), 0, -std::cos(a)), center, 320, 240, 300);
    };
    std::vector<NamedCamera> cams = {{"a", on_circle(-5)}, {"b", on_circle(5)}};
    const Camera target = on_circle(0);
    const MarchResult r =
        raymarch_depth(TsdfContext(nvs::testing::render_depth_views(spec, cams), TsdfParams{}), target);
    size_t disk = 0;
    size_t good = 0;
    for (int y = 0; y < target.height; ++y) {
      for (int x = 0; x < target.width; ++x) {
        const double z = nvs::testing::sphere_depth(target, x + 0.5, y + 0.5, center, radius);
        if (z <= 0) continue;
        ++disk;
        const float d = r.depth.at(x, y);
        if (valid_depth(d) && std::fabs(d - z) <= 0.005) ++good;
      }
    }
    const double frac = disk ? static_cast<double>(good) / disk : 0.0;
    out.push_back({"2b", frac >= 0.98,
                   fmt("sphere: %.4f of %zu disk pixels within 5 mm (need >= 0.98)", frac, disk)});
  }
  return out;
}

// 3. A view splatted back into its own camera.
std::vector<Line> identity_reprojection() {
  const Camera cam = nvs::testing::axis_camera(640, 360, 500);
  SceneSpec spec = nvs::testing::plane_scene(2.0, 2.0);
  spec.primitives[0].texture.scale = 0.4;
  const RenderedFrame f = render_scene(spec, cam, 0);
  const SplatRender r = render_splats(gaussians_from_view(f.color, f.depth, cam), cam);
  double se = 0.0;
  size_t n = 0;
  float min_alpha = 1.0f;
  for (size_t i = 0; i < f.depth.size(); ++i) {
    if (!valid_depth(f.depth[i])) continue;
    const float a = r.alpha[i];
    min_alpha = std::min(min_alpha, a);
    const Rgb c = r.color[i] * (1.0f / std::max(a, 1e-6f));
    const Rgb& g = f.color[i];
    se += (c.r - g.r) * (c.r - g.r) + (c.g - g.g) * (c.g - g.g) + (c.b - g.b) * (c.b - g.b);
    n += 3;
  }
  const double p = n ? 10.0 * std::log10(1.0 / std::max(se / n, 1e-30)) : 0.0;
  const bool pass = n > 0 && p > 40.0 && min_alpha > 0.99f;
  return {{"3", pass, fmt("PSNR %.2f dB, min alpha %.5f on valid pixels (need > 40, > 0.99)", p, min_alpha)}};
}

// 4. Temporal damping of a static noisy plane.
std::vector<Line> temporal_damping() {
  std::vector<Line> out;
  const double sigma = 0.005;
  {
    // (a) the depth filter alone, through difference_mask of unchanged color.
    const int w = 128, h = 128, frames = 30;
    const ColorImage color(w, h, Rgb{0.4f, 0.5f, 0.6f});
    const ScalarMap clean(w, h, MapKind::kDepth, 2.0f);
    const NoiseSpec noise{sigma, 0.0, 11};
    std::optional<ViewTemporalState> state;
    ScalarMap filtered;
    for (int t = 0; t < frames; ++t) {
      const ScalarMap noisy = add_noise(clean, noise, t);
      const ScalarMap mask = state ? difference_mask(color, state->prev_color, FilterParams{})
                                   : ScalarMap(w, h, MapKind::kMask, 1.0f);
      filtered = filter_depth(noisy, mask, state);
      state = ViewTemporalState{color, filtered};
    }
    double sum = 0, sum2 = 0;
    for (float d : filtered.pixels()) {
      sum += d - 2.0;
      sum2 += (d - 2.0) * (d - 2.0);
    }
    const double n = static_cast<double>(filtered.size());
    const double sd = std::sqrt(std::max(sum2 / n - (sum / n) * (sum / n), 0.0));
    out.push_back({"4a", sd <= 0.55 * sigma,
                   fmt("filtered depth std %.3f sigma after %d frames (need <= 0.55 sigma)", sd / sigma,
                       frames)});
  }
  {
    // (b) full pipeline with and without the temporal TSDF term.
    const Vec3 at(0, 0, 2);
    const auto cams = nvs::testing::rig(4, 0.4, at, 160, 120, 150);
    const Camera target = camera_at(Vec3(0.03, 0.05, 0), at, 160, 120, 150);
    SceneSpec spec = nvs::testing::plane_scene(2.0, 2.0);
    spec.frames = 30;
    const NoiseSpec noise{sigma, 0.0, 5};
    const ColorImage gt = render_scene(spec, target, 0).color;
    auto run = [&](bool temporal_tsdf) {
      PipelineConfig cfg;
      cfg.temporal_tsdf = temporal_tsdf;
      FrameState state;
      std::vector<ColorImage> rendered;
      for (int t = 0; t < spec.frames; ++t) {
        FrameOutput o =
            run_frame(nvs::testing::render_view_frames(spec, cams, t, &noise), target, state, cfg);
        rendered.push_back(std::move(o.color));
        state = std::move(o.state);
      }
      const std::vector<ColorImage> truth(rendered.size(), gt);
      return sdt(rendered, truth);
    };
    const double with = run(true);
    const double without = run(false);
    out.push_back({"4b", with < without,
                   fmt("SDT with temporal TSDF %.6f, without %.6f (need with < without)", with, without)});
  }
  return out;
}

// 5. Heuristic vs. uniform blending when one view's depth is biased.
std::vector<Line> corrupted_depth() {
  const Vec3 at(0, 0, 2);
  const auto cams = nvs::testing::rig(2, 0.5, at, 320, 240, 400);
  const Camera target = camera_at(Vec3(0, 0.02, 0), at, 320, 240, 400);
  SceneSpec spec = nvs::testing::plane_scene(2.0, 2.0);
  spec.primitives[0].texture.kind = TextureKind::kChecker;
  spec.primitives[0].texture.scale = 0.03;
  std::vector<ViewFrame> inputs = nvs::testing::render_view_frames(spec, cams);
  ScalarMap& d = inputs[1].depth;
  for (int y = 0; y < d.height(); ++y) {
    for (int x = d.width() / 2; x < d.width(); ++x) {
      if (valid_depth(d.at(x, y))) d.at(x, y) += 0.05f;
    }
  }
  const ColorImage gt = render_scene(spec, target, 0).color;
  auto run = [&](BlendStrategy s) {
    PipelineConfig cfg;
    cfg.blend_strategy = s;
    return run_frame(inputs, target, FrameState{}, cfg);
  };
  const FrameOutput heur = run(BlendStrategy::kHeuristic);
  const FrameOutput unif = run(BlendStrategy::kUniform);
  const double ph = psnr(heur.color, gt);
  const double pu = psnr(unif.color, gt);
  const double rh = heur.diagnostics.depth_blend_residual;
  const double ru = unif.diagnostics.depth_blend_residual;
  const bool pass = ph - pu >= 1.0 && rh <= ru;
  return {{"5", pass,
           fmt("PSNR heuristic %.2f dB vs uniform %.2f dB (+%.2f, need >= 1); residual %.5f vs %.5f m", ph,
               pu, ph - pu, rh, ru)}};
}

// 6. Metrics against pinned reference values.
std::vector<Line> metric_fixtures(const fs::path& dir) {
  const fs::path file = dir / "metrics_8x8.json";
  std::ifstream in(file);
  if (!in) return {{"6", false, "cannot open " + file.string()}};
  const nlohmann::json j = nlohmann::json::parse(in);
  auto image = [](const nlohmann::json& a) {
    const int w = a.at("width"), h = a.at("height");
    const std::vector<float> v = a.at("rgb").get<std::vector<float>>();
    std::vector<Rgb> px(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < px.size(); ++i) px[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
    return ColorImage::from_pixels(w, h, std::move(px));
  };
  auto images = [&](const nlohmann::json& a) {
    std::vector<ColorImage> out;
    for (const auto& e : a) out.push_back(image(e));
    return out;
  };
  size_t checked = 0;
  double worst = 0.0;
  std::string where;
  auto check = [&](const std::string& name, double got, double want) {
    ++checked;
    const double err = std::fabs(got - want);
    if (err > worst || std::isnan(got)) {
      worst = std::isnan(got) ? INFINITY : err;
      where = name;
    }
  };
  for (const auto& c : j.at("pairs")) {
    const ColorImage a = image(c.at("a")), b = image(c.at("b"));
    const std::string name = c.at("name");
    check(name + "/psnr", psnr(a, b), c.at("psnr"));
    check(name + "/ssim", ssim(a, b), c.at("ssim"));
  }
  for (const auto& c : j.at("sequences")) {
    const auto r = images(c.at("rendered")), g = images(c.at("gt"));
    const std::string name = c.at("name");
    check(name + "/tcc", tcc(r, g), c.at("tcc"));
    check(name + "/sdt", sdt(r, g), c.at("sdt"));
  }
  for (const auto& c : j.at("views")) {
    std::vector<double> l1s;
    for (const auto& p : c.at("pairs")) l1s.push_back(l1(image(p.at("a")), image(p.at("b"))));
    check(std::string(c.at("name")) + "/sdv", sdv(l1s), c.at("sdv"));
  }
  const bool pass = checked > 0 && worst <= 1e-6;
  return {{"6", pass, fmt("%zu values, worst |err| %.3g at %s (need <= 1e-6)", checked, worst,
                          where.empty() ? "-" : where.c_str())}};
}

// 7. run_frame latency at 640x360 with four views.
std::vector<Line> latency() {
  const Vec3 at(0, 0, 2.5);
  const auto cams = nvs::testing::rig(4, 0.6, at, 640, 360, 500);
  const Camera target = camera_at(Vec3(0.05, 0.05, 0), at, 640, 360, 500);
  SceneSpec spec;
  spec.primitives.push_back(nvs::testing::plane_at(3.0, 3.0));
  spec.primitives.push_back(nvs::testing::sphere_scene(0.4, Vec3(-0.4, 0, 2.3)).primitives[0]);
  spec.primitives.push_back(nvs::testing::plane_box_scene().primitives[1]);
  spec.frames = 3;
  PipelineConfig cfg;
  FrameState state;
  double worst_total = 0.0;
  double worst_stage = 0.0;
  std::string worst_name;
  std::string last;
  for (int t = 0; t < spec.frames; ++t) {
    const auto inputs = nvs::testing::render_view_frames(spec, cams, t);
    const auto t0 = std::chrono::steady_clock::now();
    FrameOutput o = run_frame(inputs, target, state, cfg);
    worst_total = std::max(worst_total, seconds_since(t0));
    last.clear();
    for (const StageTime& s : o.diagnostics.stages) {
      last += fmt("%s %.0f ms ", s.name.c_str(), s.ms);
      if (s.ms > worst_stage) {
        worst_stage = s.ms;
        worst_name = s.name;
      }
    }
    state = std::move(o.state);
  }
  const bool pass = worst_total < 2.0 && worst_stage < 1000.0;
  return {{"7", pass,
           fmt("worst frame %.3f s, worst stage %s %.0f ms; last frame: %s(need < 2 s, < 1000 ms)",
               worst_total, worst_name.c_str(), worst_stage, last.c_str())}};
}

// 8. Two renders of one dataset are byte-identical.
std::vector<Line> determinism() {
  const fs::path root = fs::temp_directory_path() / "nvs_acceptance_determinism";
  fs::remove_all(root);
  const Vec3 at(0, 0, 2);
  auto cams = nvs::testing::rig(4, 0.4, at, 160, 120, 150);
  cams.push_back({"held", camera_at(Vec3(0.02, 0.03, 0), at, 160, 120, 150)});
  SceneSpec spec = nvs::testing::plane_box_scene();
  spec.primitives[1].velocity = Vec3(0.3, 0, 0);
  spec.frames = 4;
  spec.rig = cams;
  const NoiseSpec noise{0.003, 0.01, 9};
  for (int t = 0; t < spec.frames; ++t) {
    for (size_t i = 0; i < cams.size(); ++i) {
      RenderedFrame f = render_scene(spec, cams[i].camera, t);
      write_view_frame(root / "data", cams[i].id, t, f.color, add_noise(f.depth, noise, t * 100 + i));
    }
  }
  write_camera_manifest(root / "cameras.json", cams);
  auto render = [&](const char* out) {
    PipelineConfig cfg;
    cfg.dataset_root = root / "data";
    cfg.manifest = root / "cameras.json";
    cfg.output_dir = root / out;
    cfg.target_camera_id = "held";
    run_sequence(cfg);
  };
  render("run1");
  render("run2");
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  size_t files = 0;
  size_t differ = 0;
  for (const auto& e : fs::directory_iterator(root / "run1")) {
    const std::string ext = e.path().extension();
    if (ext != ".png" && ext != ".pfm") continue;
    ++files;
    if (bytes(e.path()) != bytes(root / "run2" / e.path().filename())) ++differ;
  }
  fs::remove_all(root);
  const bool pass = files == 2u * spec.frames && differ == 0;
  return {{"8", pass, fmt("%zu output files compared, %zu differ", files, differ)}};
}

// 9. The unit suites.
std::vector<Line> unit_suites(const std::string& exe) {
  if (exe.empty()) return {{"9", false, "unit test executable not given (--unit-tests)"}};
  const std::string cmd = "\"" + exe + "\" --gtest_brief=1 > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {{"9", rc == 0, fmt("%s exit status %d", exe.c_str(), rc)}};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path fixtures = "tests/fixtures";
  std::string unit_exe;
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--fixtures" && i + 1 < argc) {
      fixtures = argv[++i];
    } else if (a == "--unit-tests" && i + 1 < argc) {
      unit_exe = argv[++i];
    } else {
      wanted.insert(std::stoi(a));
    }
  }
  const std::map<int, std::pair<const char*, std::function<std::vector<Line>()>>> criteria = {
      {1, {"oracle equivalence", oracle_equivalence}},
      {2, {"analytic depth accuracy", analytic_depth}},
      {3, {"identity reprojection", identity_reprojection}},
      {4, {"temporal damping", temporal_damping}},
      {5, {"geometry-guided blending", corrupted_depth}},
      {6, {"metric fixtures", [&] { return metric_fixtures(fixtures); }}},
      {7, {"latency budget", latency}},
      {8, {"determinism", determinism}},
      {9, {"unit suites", [&] { return unit_suites(unit_exe); }}},
  };
  bool all = true;
  for (const auto& [id, c] : criteria) {
    if (!wanted.empty() && !wanted.count(id)) continue;
    std::vector<Line> lines;
    try {
      lines = c.second();
    } catch (const std::exception& e) {
      lines = {{std::to_string(id), false, std::string("exception: ") + e.what()}};
    }
    for (const Line& l : lines) {
      std::printf("%s %-3s %s: %s\n", l.pass ? "PASS" : "FAIL", l.id.c_str(), c.first, l.detail.c_str());
      std::fflush(stdout);
      all = all && l.pass;
    }
  }
  return all ? 0 : 1;
}
