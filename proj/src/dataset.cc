// SPDX-License-Identifier: Apache-2.0
#include "nvs/dataset.h"

#include <cstdio>
#include <stdexcept>

#include "nvs/image_io.h"

namespace nvs {

namespace {

std::string numbered(const char* stem, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.%s", stem, frame, ext);
  return buf;
}

}  // namespace

std::filesystem::path color_path(const std::filesystem::path& root, const std::string& cam_id, int frame) {
  return root / cam_id / numbered("color", frame, "png");
}

std::filesystem::path depth_path(const std::filesystem::path& root, const std::string& cam_id, int frame) {
  return root / cam_id / numbered("depth", frame, "pfm");
}

DatasetReader::DatasetReader(std::filesystem::path root, std::vector<NamedCamera> cameras,
                             std::optional<double> png_depth_scale)
    : root_(std::move(root)), cameras_(std::move(cameras)), png_depth_scale_(png_depth_scale) {
  if (cameras_.empty()) throw std::invalid_argument("dataset: no cameras");
  if (!std::filesystem::is_directory(root_)) {
    throw std::runtime_error("dataset root is not a directory: " + root_.string());
  }
}

int DatasetReader::frame_count() const {
  int t = 0;
  for (;; ++t) {
    for (const NamedCamera& c : cameras_) {
      if (!std::filesystem::exists(color_path(root_, c.id, t))) return t;
    }
  }
}

std::vector<ViewFrame> DatasetReader::read_frame(int t, const std::vector<int>& views) {
  if (t <= last_frame_) {
    throw std::runtime_error("dataset: frame " + std::to_string(t) + " requested after frame " +
                             std::to_string(last_frame_) + " (frames must increase)");
  }
  std::vector<int> which = views;
  if (which.empty()) {
    for (int i = 0; i < static_cast<int>(cameras_.size()); ++i) which.push_back(i);
  }
  std::vector<ViewFrame> out;
  for (int i : which) {
    if (i < 0 || i >= static_cast<int>(cameras_.size())) {
      throw std::out_of_range("dataset: camera index out of range");
    }
    const NamedCamera& cam = cameras_[i];
    ViewFrame f;
    f.id = cam.id;
    f.camera = cam.camera;
    const auto cpath = color_path(root_, cam.id, t);
    if (!std::filesystem::exists(cpath)) throw std::runtime_error("missing color file: " + cpath.string());
    f.color = read_png(cpath);
    auto dpath = depth_path(root_, cam.id, t);
    if (std::filesystem::exists(dpath)) {
      f.depth = read_pfm(dpath);
    } else if (auto png = dpath.replace_extension(".png");
               png_depth_scale_ && std::filesystem::exists(png)) {
      f.depth = read_png_depth(png, *png_depth_scale_);
    } else {
      throw std::runtime_error("missing depth file: " + depth_path(root_, cam.id, t).string());
    }
    if (f.color.width() != cam.camera.width || f.color.height() != cam.camera.height) {
      throw std::runtime_error(cpath.string() + ": size does not match camera " + cam.id);
    }
    if (f.depth.width() != cam.camera.width || f.depth.height() != cam.camera.height) {
      throw std::runtime_error(depth_path(root_, cam.id, t).string() +
                               ": size does not match camera " + cam.id);
    }
    out.push_back(std::move(f));
  }
  last_frame_ = t;
  return out;
}

void write_view_frame(const std::filesystem::path& root, const std::string& cam_id, int frame,
                      const ColorImage& color, const ScalarMap& depth) {
  std::filesystem::create_directories(root / cam_id);
  write_png(color_path(root, cam_id, frame), color);
  write_pfm(depth_path(root, cam_id, frame), depth);
}

}  // namespace nvs
