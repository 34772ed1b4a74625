// SPDX-License-Identifier: Apache-2.0
#include "nvs/pipeline.h"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "nvs/image_io.h"
#include "nvs/metrics.h"

namespace nvs {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  explicit StageTimer(std::vector<StageTime>& out) : out_(out) {}
  void start() { begin_ = Clock::now(); }
  void stop(const std::string& name) {
    out_.push_back({name, std::chrono::duration<double, std::milli>(Clock::now() - begin_).count()});
  }

 private:
  std::vector<StageTime>& out_;
  Clock::time_point begin_;
};

bool same_camera(const Camera& a, const Camera& b) {
  return a.same_pose(b) && a.fx == b.fx && a.fy == b.fy && a.cx == b.cx && a.cy == b.cy &&
         a.width == b.width && a.height == b.height;
}

std::string numbered(const char* stem, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.%s", stem, frame, ext);
  return buf;
}

}  // namespace

FrameOutput run_frame(const std::vector<ViewFrame>& inputs, const Camera& target,
                      const FrameState& state, const PipelineConfig& cfg) {
  if (inputs.empty()) throw std::invalid_argument("run_frame: no input views");
  target.validate();
  for (const ViewFrame& v : inputs) {
    if (!v.color.same_size(v.depth) || v.color.width() != v.camera.width ||
        v.color.height() != v.camera.height) {
      throw std::invalid_argument("run_frame: view " + v.id + " does not match its camera");
    }
  }

  FrameOutput out;
  StageTimer timer(out.diagnostics.stages);
  const size_t k = inputs.size();

  // Difference masks and temporally filtered depths.
  timer.start();
  std::vector<ScalarMap> masks(k);
  std::vector<ScalarMap> filtered(k);
  bool have_masks = true;
  for (size_t i = 0; i < k; ++i) {
    const ViewFrame& v = inputs[i];
    const auto it = state.views.find(v.id);
    std::optional<ViewTemporalState> prev;
    if (it != state.views.end() && it->second.prev_color.same_size(v.color)) prev = it->second;
    if (prev) {
      masks[i] = difference_mask(v.color, prev->prev_color, cfg.filter);
    } else {
      masks[i] = ScalarMap(v.depth.width(), v.depth.height(), MapKind::kMask, 1.0f);
      have_masks = false;
    }
    filtered[i] = cfg.temporal_filter ? filter_depth(v.depth, masks[i], prev) : v.depth;
  }
  timer.stop("filter");

  // Novel-view mask and accumulated weight for the temporal TSDF term.
  timer.start();
  std::optional<TemporalDepth> temporal;
  const bool temporal_ready = cfg.temporal_tsdf && have_masks && state.target &&
                              same_camera(*state.target, target) && state.hit_weights &&
                              !state.novel_depth.empty();
  if (temporal_ready) {
    std::vector<Camera> cams;
    for (const ViewFrame& v : inputs) cams.push_back(v.camera);
    TemporalDepth t;
    t.camera = target;
    t.depth = state.novel_depth;
    t.novel_mask = splat_masks_to_target(masks, cams, filtered, target);
    t.accumulated_weight =
        update_accumulated_weight(&*state.hit_weights, target.width, target.height, cfg.tsdf.eta);
    temporal = std::move(t);
  }
  timer.stop("mask-splat");

  timer.start();
  std::vector<DepthView> depth_views;
  for (size_t i = 0; i < k; ++i) depth_views.push_back({inputs[i].camera, filtered[i]});
  const ScalarMap accumulated = temporal ? temporal->accumulated_weight : ScalarMap();
  const TsdfContext ctx(std::move(depth_views), cfg.tsdf, std::move(temporal));
  MarchResult march = raymarch_depth(ctx, target);
  timer.stop("tsdf");

  timer.start();
  std::vector<SplatRender> renders;
  std::vector<Camera> src_cams;
  for (size_t i = 0; i < k; ++i) {
    const SplatSet set = gaussians_from_view(inputs[i].color, inputs[i].depth, inputs[i].camera,
                                             cfg.splat.pixel_scale, static_cast<int>(i));
    renders.push_back(render_splats(set, target, cfg.splat));
    src_cams.push_back(inputs[i].camera);
  }
  timer.stop("splat");

  timer.start();
  const BlendFeatures feat = compute_features(renders, target, march.depth, src_cams);
  const BlendWeights weights = make_weight_provider(cfg.blend_strategy, cfg.blend)->weights(feat);
  const Foreground fg = blend_foreground(renders, weights);
  out.color = composite_background(fg, weights);
  timer.stop("blend");

  out.diagnostics.depth_blend_residual = depth_blend_residual(weights, renders, march.depth);
  size_t hits = 0;
  for (float h : march.hitmask.pixels()) hits += h > 0.0f;
  out.diagnostics.hit_fraction = static_cast<double>(hits) / static_cast<double>(march.hitmask.size());

  out.state.views = state.views;
  for (size_t i = 0; i < k; ++i) out.state.views[inputs[i].id] = {inputs[i].color, filtered[i]};
  out.state.target = target;
  out.state.novel_depth = march.depth;
  out.state.hit_weights = std::move(march.weights);
  out.state.accumulated_weight = accumulated;
  out.depth = std::move(march.depth);
  return out;
}

SequenceReport run_sequence(const PipelineConfig& cfg) {
  cfg.validate();
  const std::vector<NamedCamera> rig = read_camera_manifest(cfg.manifest);

  // Target cameras and the rig cameras eligible as inputs.
  std::vector<Camera> targets;
  int gt_index = -1;
  std::vector<int> candidates;
  if (!cfg.target_camera_id.empty()) {
    gt_index = find_camera(rig, cfg.target_camera_id);
    targets.push_back(rig[gt_index].camera);
  } else {
    for (const NamedCamera& c : read_camera_manifest(cfg.trajectory)) targets.push_back(c.camera);
  }
  for (int i = 0; i < static_cast<int>(rig.size()); ++i) {
    if (i != gt_index) candidates.push_back(i);
  }
  std::vector<Camera> candidate_cams;
  for (int i : candidates) candidate_cams.push_back(rig[i].camera);

  DatasetReader reader(cfg.dataset_root, rig, cfg.png_depth_scale);
  const int available = reader.frame_count();
  if (available <= cfg.first_frame) {
    throw std::runtime_error("dataset has " + std::to_string(available) + " frames; first frame is " +
                             std::to_string(cfg.first_frame));
  }
  const int count = cfg.frame_count < 0 ? available - cfg.first_frame
                                        : std::min(cfg.frame_count, available - cfg.first_frame);
  if (cfg.write_outputs) std::filesystem::create_directories(cfg.output_dir);

  SequenceReport report;
  std::vector<ColorImage> rendered;
  std::vector<ColorImage> truth;
  FrameState state;
  for (int n = 0; n < count; ++n) {
    const int t = cfg.first_frame + n;
    const Camera& target = targets[std::min<size_t>(n, targets.size() - 1)];
    const std::vector<int> picked =
        select_nearest_views(candidate_cams, target, std::min<int>(cfg.k, candidate_cams.size()), true);
    std::vector<int> views;
    for (int p : picked) views.push_back(candidates[p]);
    if (gt_index >= 0) views.push_back(gt_index);
    std::vector<ViewFrame> frame = reader.read_frame(t, views);
    std::optional<ColorImage> gt;
    if (gt_index >= 0) {
      gt = std::move(frame.back().color);
      frame.pop_back();
    }

    FrameOutput result = run_frame(frame, target, state, cfg);
    state = std::move(result.state);

    FrameRecord rec;
    rec.frame = t;
    rec.stages = result.diagnostics.stages;
    rec.depth_blend_residual = result.diagnostics.depth_blend_residual;
    rec.hit_fraction = result.diagnostics.hit_fraction;
    if (gt) {
      rec.psnr = psnr(result.color, *gt);
      rec.ssim = ssim(result.color, *gt);
      rec.l1 = l1(result.color, *gt);
      rendered.push_back(result.color);
      truth.push_back(std::move(*gt));
    }
    if (cfg.write_outputs) {
      write_png(cfg.output_dir / numbered("color", t, "png"), result.color);
      write_pfm(cfg.output_dir / numbered("depth", t, "pfm"), result.depth);
    }
    report.frames.push_back(std::move(rec));
  }
  if (!truth.empty()) {
    report.sdt = sdt(rendered, truth);
    if (truth.size() >= 2) report.tcc = tcc(rendered, truth);
  }
  if (cfg.write_outputs) write_report(cfg.output_dir / "report.jsonl", report);
  return report;
}

}  // namespace nvs
