// SPDX-License-Identifier: Apache-2.0
#include "nvs/camgeom.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

namespace nvs {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("camera focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("camera image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw std::invalid_argument("camera principal point outside the image");
  }
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("camera pose is not finite");
  }
  const double ortho =
      (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho >= 1e-6 || rotation.determinant() <= 0.0) {
    throw std::invalid_argument("camera rotation is not a proper rotation (residual " +
                                std::to_string(ortho) + ")");
  }
}

std::optional<Projection> project(const Vec3& p, const Camera& cam) {
  const Vec3 pc = cam.rotation * p + cam.translation;
  if (!(pc.z() > kMinProjectDepth)) return std::nullopt;
  const double inv_z = 1.0 / pc.z();
  return Projection{cam.fx * pc.x() * inv_z + cam.cx,
                    cam.fy * pc.y() * inv_z + cam.cy, pc.z()};
}

Vec3 unproject(double u, double v, double depth, const Camera& cam) {
  if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(depth)) {
    throw std::invalid_argument("unproject: non-finite input");
  }
  if (depth <= 0.0) {
    throw std::invalid_argument("unproject: depth must be positive");
  }
  const Vec3 pc((u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth);
  return cam.rotation.transpose() * (pc - cam.translation);
}

Vec3 depth_ray(const Camera& cam, double u, double v) {
  const Vec3 dc((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  return cam.rotation.transpose() * dc;
}

Ray ray_for_pixel(const Camera& cam, double u, double v) {
  return Ray{cam.center(), depth_ray(cam, u, v).normalized()};
}

std::vector<int> select_nearest_views(std::span<const Camera> all,
                                      const Camera& target, int k,
                                      bool exclude_self, ViewSelection strategy) {
  if (k < 0) throw std::invalid_argument("select_nearest_views: k must be >= 0");
  std::vector<int> candidates;
  for (int i = 0; i < static_cast<int>(all.size()); ++i) {
    if (exclude_self && all[i].same_pose(target)) continue;
    candidates.push_back(i);
  }
  if (static_cast<int>(candidates.size()) < k) {
    throw std::invalid_argument("select_nearest_views: requested " + std::to_string(k) +
                                " views but only " + std::to_string(candidates.size()) +
                                " are available");
  }

  const Vec3 target_center = target.center();
  const Vec3 target_axis = target.forward();
  std::vector<double> distance(all.size(), 0.0);
  std::vector<double> angle(all.size(), 0.0);
  for (int i : candidates) {
    distance[i] = (all[i].center() - target_center).norm();
    angle[i] = std::acos(std::clamp(all[i].forward().dot(target_axis), -1.0, 1.0));
  }

  auto closer = [&](int a, int b) {
    if (strategy == ViewSelection::kViewAngle && angle[a] != angle[b]) {
      return angle[a] < angle[b];
    }
    if (distance[a] != distance[b]) return distance[a] < distance[b];
    return a < b;
  };
  std::stable_sort(candidates.begin(), candidates.end(), closer);
  candidates.resize(k);
  return candidates;
}

Camera look_at_camera(const Vec3& eye, const Vec3& look_at, const Vec3& up,
                      double fx, double fy, int width, int height) {
  const Vec3 z = (look_at - eye).normalized();
  // Image y points down, so the camera's +y is world "down".
  Vec3 x = (-up).cross(z);
  if (x.squaredNorm() < 1e-20) {
    throw std::invalid_argument("look_at_camera: up is parallel to the view direction");
  }
  x.normalize();
  const Vec3 y = z.cross(x);
  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.width = width;
  cam.height = height;
  cam.rotation.row(0) = x.transpose();
  cam.rotation.row(1) = y.transpose();
  cam.rotation.row(2) = z.transpose();
  cam.translation = -cam.rotation * eye;
  return cam;
}

}  // namespace nvs
