// SPDX-License-Identifier: Apache-2.0
//
// Synthetic multi-view RGB-D scenes with analytic ground truth: textured
// planes, spheres and axis-aligned boxes, optional linear motion, seeded
// depth noise, and a brute-force voxel TSDF used as a reference for the
// image-space field.
#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvs/camera_manifest.h"
#include "nvs/camgeom.h"
#include "nvs/raster.h"

namespace nvs {

enum class TextureKind { kSolid, kChecker, kGradient, kSmooth };

struct Texture {
  TextureKind kind = TextureKind::kChecker;
  Rgb color_a{0.9f, 0.9f, 0.9f};
  Rgb color_b{0.1f, 0.1f, 0.1f};
  double scale = 0.1;  // checker cell / gradient period / smooth wavelength, meters
  uint64_t seed = 0;   // phase offsets of the smooth texture

  // Color at surface coordinates (s, t) in meters.
  Rgb eval(double s, double t) const;
};

enum class PrimitiveKind { kPlane, kSphere, kBox };

// Planes are finite rectangles: center, unit normal, in-plane axis `u_axis`
// and half extents (half_size.x along u, half_size.y along normal x u).
// Spheres use `radius`. Boxes are axis aligned with half extents half_size.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::kPlane;
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3(0, 0, -1);
  Vec3 u_axis = Vec3(1, 0, 0);
  Vec3 half_size = Vec3(1, 1, 1);
  double radius = 0.5;
  Vec3 velocity = Vec3::Zero();  // meters per second
  Texture texture;

  void validate() const;
  Vec3 center_at(double seconds) const { return center + velocity * seconds; }
};

struct SceneSpec {
  std::vector<Primitive> primitives;
  std::vector<NamedCamera> rig;
  int frames = 1;
  double fps = 30.0;

  void validate() const;
};

struct NoiseSpec {
  double sigma = 0.0;    // meters
  double dropout = 0.0;  // fraction of pixels set invalid, [0, 1)
  uint64_t seed = 0;

  void validate() const;
};

struct RenderedFrame {
  ColorImage color;
  ScalarMap depth;
};

// Closest analytic hit per pixel center; background is black with invalid
// depth. Throws std::out_of_range for frame >= spec.frames.
RenderedFrame render_scene(const SceneSpec& spec, const Camera& cam, int frame);

// Distance along a unit ray to the closest primitive at time `seconds`.
std::optional<double> intersect_scene(const SceneSpec& spec, const Ray& ray, double seconds,
                                      Rgb* color = nullptr);

// Adds N(0, sigma^2) to valid pixels and drops a seeded fraction to the
// invalid sentinel. `stream` decorrelates views and frames under one seed.
// Noisy values that would fall to <= 0 are clamped to a tiny positive depth.
ScalarMap add_noise(const ScalarMap& depth, const NoiseSpec& noise, uint64_t stream = 0);

// World-space bounding box of the primitives at frame `frame`.
struct Aabb {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());
  bool empty() const { return !(lo.x() <= hi.x()); }
  void extend(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
};
Aabb scene_bounds(const SceneSpec& spec, int frame);

struct VoxelOracleParams {
  double voxel = 0.005;  // meters
  double tau = 0.02;     // meters
  int window = 7;        // fusion-weight neighborhood (same weights as the image-space field)
  int max_dim = 192;     // voxels per axis
  double depth_edge = 4.0;  // depth-discontinuity rejection, in tau (see TsdfParams)
};

// Classic volumetric fusion of the depth maps into a grid spanning the
// observed points' bounding box plus 4 tau, then a fixed-step march through
// the grid with trilinear interpolation and linear zero-crossing refinement.
// Throws std::invalid_argument when the grid would exceed max_dim per axis.
ScalarMap voxel_tsdf_oracle(const std::vector<std::pair<Camera, ScalarMap>>& views,
                            const Camera& target, const VoxelOracleParams& params = {});

nlohmann::json scene_to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);
SceneSpec read_scene(const std::filesystem::path& path);
void write_scene(const SceneSpec& spec, const std::filesystem::path& path);

nlohmann::json noise_to_json(const NoiseSpec& n);
NoiseSpec noise_from_json(const nlohmann::json& j);

}  // namespace nvs
