// SPDX-License-Identifier: Apache-2.0
//
// Camera manifest: a JSON document listing the cameras of a rig.
//
//   {
//     "cameras": [
//       {"id": "cam00", "fx": 500.0, "fy": 500.0, "cx": 320.0, "cy": 180.0,
//        "width": 640, "height": 360,
//        "rotation": [1,0,0, 0,1,0, 0,0,1],     // row-major, world-to-camera
//        "translation": [0.0, 0.0, 0.0]}        // world-to-camera, meters
//     ]
//   }
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nvs/camgeom.h"

namespace nvs {

struct NamedCamera {
  std::string id;
  Camera camera;
};

nlohmann::json camera_to_json(const NamedCamera& cam);
// Validates the camera invariants; throws std::invalid_argument on failure.
NamedCamera camera_from_json(const nlohmann::json& j);

std::vector<NamedCamera> read_camera_manifest(const std::filesystem::path& path);
void write_camera_manifest(const std::filesystem::path& path,
                           const std::vector<NamedCamera>& cameras);

// Index of the camera named `id`; throws std::out_of_range when absent.
int find_camera(const std::vector<NamedCamera>& cameras, const std::string& id);

}  // namespace nvs
