// SPDX-License-Identifier: Apache-2.0
//
// Small synthetic scenes shared by the unit tests, the acceptance binary and
// the benchmarks. Everything is seeded; the same call returns the same data.
#pragma once

#include <vector>

#include "nvs/camgeom.h"
#include "nvs/dataset.h"
#include "nvs/imgtsdf.h"
#include "nvs/scenegen.h"

namespace nvs::testing {

// Camera at `eye` looking at `at` with world +y up.
Camera camera_at(const Vec3& eye, const Vec3& at, int width, int height, double focal);

// Identity-pose camera with the principal point at the image center.
Camera axis_camera(int width, int height, double focal);

// Fronto-parallel square of side 2*half at depth z, smooth texture.
Primitive plane_at(double z, double half, TextureKind texture = TextureKind::kSmooth);

SceneSpec plane_scene(double z = 2.0, double half = 0.35);
SceneSpec sphere_scene(double radius, const Vec3& center = Vec3(0, 0, 2));
// Backdrop plane with a box in front of it.
SceneSpec plane_box_scene();

// Input rig: `count` cameras spread horizontally over `baseline` meters at
// z = 0, all looking at `at`.
std::vector<NamedCamera> rig(int count, double baseline, const Vec3& at, int width, int height,
                             double focal);

std::vector<DepthView> render_depth_views(const SceneSpec& spec, const std::vector<NamedCamera>& cams,
                                          int frame = 0);

std::vector<ViewFrame> render_view_frames(const SceneSpec& spec, const std::vector<NamedCamera>& cams,
                                          int frame = 0, const NoiseSpec* noise = nullptr);

// Camera-space depth of the nearer ray-sphere intersection through the pixel
// center, 0 on a miss. Closed form, independent of the scene renderer.
double sphere_depth(const Camera& cam, double u, double v, const Vec3& center, double radius);

}  // namespace nvs::testing
