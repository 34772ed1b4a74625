// SPDX-License-Identifier: Apache-2.0
#include "nvs/camera_manifest.h"

#include <fstream>
#include <set>
#include <stdexcept>

namespace nvs {

nlohmann::json camera_to_json(const NamedCamera& named) {
  const Camera& c = named.camera;
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int col = 0; col < 3; ++col) rot.push_back(c.rotation(r, col));
  }
  return {{"id", named.id},
          {"fx", c.fx},
          {"fy", c.fy},
          {"cx", c.cx},
          {"cy", c.cy},
          {"width", c.width},
          {"height", c.height},
          {"rotation", rot},
          {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}}};
}

NamedCamera camera_from_json(const nlohmann::json& j) {
  NamedCamera named;
  try {
    named.id = j.at("id").get<std::string>();
    Camera& c = named.camera;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    const auto rot = j.at("rotation").get<std::vector<double>>();
    const auto trans = j.at("translation").get<std::vector<double>>();
    if (rot.size() != 9 || trans.size() != 3) {
      throw std::invalid_argument("rotation needs 9 values and translation 3");
    }
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) c.rotation(r, col) = rot[3 * r + col];
    }
    c.translation = Vec3(trans[0], trans[1], trans[2]);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed camera entry: ") + e.what());
  }
  try {
    named.camera.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("camera '" + named.id + "': " + e.what());
  }
  return named;
}

std::vector<NamedCamera> read_camera_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open camera manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed camera manifest " + path.string() + ": " + e.what());
  }
  if (!doc.contains("cameras") || !doc["cameras"].is_array()) {
    throw std::runtime_error("camera manifest " + path.string() + " has no 'cameras' array");
  }
  std::vector<NamedCamera> cameras;
  std::set<std::string> ids;
  for (const auto& entry : doc["cameras"]) {
    cameras.push_back(camera_from_json(entry));
    if (!ids.insert(cameras.back().id).second) {
      throw std::runtime_error("duplicate camera id '" + cameras.back().id + "' in " +
                               path.string());
    }
  }
  if (cameras.empty()) throw std::runtime_error("camera manifest " + path.string() + " is empty");
  return cameras;
}

void write_camera_manifest(const std::filesystem::path& path,
                           const std::vector<NamedCamera>& cameras) {
  nlohmann::json doc;
  doc["cameras"] = nlohmann::json::array();
  for (const auto& c : cameras) doc["cameras"].push_back(camera_to_json(c));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write camera manifest " + path.string());
  out << doc.dump(2) << '\n';
}

int find_camera(const std::vector<NamedCamera>& cameras, const std::string& id) {
  for (size_t i = 0; i < cameras.size(); ++i) {
    if (cameras[i].id == id) return static_cast<int>(i);
  }
  throw std::out_of_range("no camera with id '" + id + "'");
}

}  // namespace nvs
