#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "understory/geometry.hpp"

namespace understory {

// One entry of the camera-array interchange file: a rigid pose plus the
// relative paths of the rendered visible/thermal pair.
struct ViewRecord {
    Pose pose;
    std::string image_vis;
    std::string image_thm;
};

// On-disk schema (field names are fixed for interchange):
// {
//   "intrinsics": {"fx","fy","cx","cy","width","height"},
//   "views": [{"rotation":[9 row-major], "translation":[3], "image_vis", "image_thm"}, ...]
// }
struct CameraArray {
    Intrinsics intrinsics;
    std::vector<ViewRecord> views;
};

CameraArray load_camera_array(const std::filesystem::path& path);
void save_camera_array(const CameraArray& array, const std::filesystem::path& path);

} // namespace understory
