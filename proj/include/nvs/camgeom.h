// SPDX-License-Identifier: Apache-2.0
//
// Pinhole camera model: projection, unprojection, viewing rays and
// nearest-view selection.
//
// Conventions:
//  * Poses are world-to-camera: x_cam = R * x_world + t.
//  * Camera space is +z forward, +x right, +y down.
//  * Pixel (i, j) covers [i, i+1) x [j, j+1); its center is (i+0.5, j+0.5).
#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nvs {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Points with camera-space depth at or below this are treated as behind the
// camera.
inline constexpr double kMinProjectDepth = 1e-6;

struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  Mat3 rotation = Mat3::Identity();  // world-to-camera
  Vec3 translation = Vec3::Zero();   // world-to-camera, meters

  // Camera center in world space, -R^T t.
  Vec3 center() const { return -rotation.transpose() * translation; }
  // Optical axis (+z of the camera) in world space.
  Vec3 forward() const { return rotation.row(2).transpose(); }
  double mean_focal() const { return 0.5 * (fx + fy); }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  bool same_pose(const Camera& other) const {
    return rotation == other.rotation && translation == other.translation;
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

struct Projection {
  double u = 0.0;  // continuous pixel coordinates
  double v = 0.0;
  double z = 0.0;  // camera-space depth, meters
};

// std::nullopt is the behind-camera marker (z <= kMinProjectDepth).
std::optional<Projection> project(const Vec3& p, const Camera& cam);

// Throws std::invalid_argument for depth <= 0 or non-finite input.
Vec3 unproject(double u, double v, double depth, const Camera& cam);

Ray ray_for_pixel(const Camera& cam, double u, double v);

// Unnormalized world-space direction d for pixel (u, v) with camera-space
// z-component 1, so that center() + z * d has camera depth z.
Vec3 depth_ray(const Camera& cam, double u, double v);

enum class ViewSelection {
  kCenterDistance,  // Euclidean distance between camera centers (default)
  kViewAngle,       // angle between optical axes, center distance as tiebreak
};

// Indices of the k cameras closest to `target`, nearest first, ties by lower
// index. With exclude_self, cameras whose pose is bitwise identical to the
// target are skipped. Throws std::invalid_argument when fewer than k
// candidates exist.
std::vector<int> select_nearest_views(std::span<const Camera> all,
                                      const Camera& target, int k,
                                      bool exclude_self = false,
                                      ViewSelection strategy =
                                          ViewSelection::kCenterDistance);

// Camera at `eye` looking at `look_at`. `up` is the approximate world-space
// up direction (image -y).
Camera look_at_camera(const Vec3& eye, const Vec3& look_at, const Vec3& up,
                      double fx, double fy, int width, int height);

}  // namespace nvs
