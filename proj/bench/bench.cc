// SPDX-License-Identifier: Apache-2.0
//
// OpenMP kernels against their serial references on a 640x360 frame with
// four input views. Run with OMP_NUM_THREADS set to compare scaling.
#include <benchmark/benchmark.h>

#include "../tests/support/scenes.h"
#include "nvs/imgtsdf.h"
#include "nvs/splat.h"

namespace {

using namespace nvs;

constexpr int kWidth = 640;
constexpr int kHeight = 360;
constexpr double kFocal = 500.0;

SceneSpec bench_scene() {
  SceneSpec s;
  s.primitives.push_back(testing::plane_at(3.0, 3.0));
  Primitive sphere;
  sphere.kind = PrimitiveKind::kSphere;
  sphere.center = Vec3(-0.4, 0.0, 2.3);
  sphere.radius = 0.4;
  s.primitives.push_back(sphere);
  return s;
}

struct Fixture {
  std::vector<NamedCamera> rig = testing::rig(4, 0.6, Vec3(0, 0, 2.5), kWidth, kHeight, kFocal);
  Camera target = testing::camera_at(Vec3(0.05, 0.03, 0), Vec3(0, 0, 2.5), kWidth, kHeight, kFocal);
  SceneSpec scene = bench_scene();
  std::vector<ViewFrame> frames = testing::render_view_frames(scene, rig);
  TsdfContext ctx{testing::render_depth_views(scene, rig), TsdfParams{}};
  std::vector<SplatSet> sets;

  Fixture() {
    for (size_t i = 0; i < frames.size(); ++i) {
      sets.push_back(gaussians_from_view(frames[i].color, frames[i].depth, frames[i].camera, 1.0,
                                         static_cast<int>(i)));
    }
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_RaymarchParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(raymarch_depth(f.ctx, f.target));
}

void BM_RaymarchReference(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(reference::raymarch_depth(f.ctx, f.target));
}

void BM_SplatParallel(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    for (const SplatSet& s : f.sets) benchmark::DoNotOptimize(render_splats(s, f.target));
  }
}

void BM_SplatReference(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) {
    for (const SplatSet& s : f.sets) benchmark::DoNotOptimize(reference::render_splats(s, f.target));
  }
}

BENCHMARK(BM_RaymarchParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RaymarchReference)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(1);
BENCHMARK(BM_SplatParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SplatReference)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
