#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "understory/camera_array.hpp"
#include "understory/fusion.hpp"
#include "understory/geometry.hpp"
#include "understory/scene.hpp"

namespace understory::cli {

// Nadir grid flown over the scene center.
struct ArraySpec {
    int grid_x = 4;
    int grid_y = 4;
    double altitude = 30.0;
    double spacing = 3.0;
    double fx = 200.0;
    double fy = 200.0;
    std::optional<double> cx; // defaults to the sensor center
    std::optional<double> cy;
    int width = 256;
    int height = 256;

    Intrinsics intrinsics() const;
};

struct EvaluationSpec {
    double iou_threshold = 0.5;
    int top_k = 0;
};

// The single canonical experiment document. Every field has a default, so an
// empty JSON object is a valid config.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    scene::GenerationConfig scene;
    ArraySpec camera_array;
    std::vector<double> focal_planes{0.0};
    fusion::FusionConfig fusion;
    EvaluationSpec evaluation;
};

// Parses the config document after applying dotted-path --set overrides
// (e.g. "camera_array.altitude=25"). Values parse as JSON when possible,
// otherwise as strings. An empty path yields the all-defaults config.
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

// Grid poses in view order (row-major over the grid), centered on `center`.
std::vector<Pose> build_grid_poses(const ArraySpec& spec, double center_x, double center_y);

// Reference camera for refocusing: nadir at the centroid of the view
// centers, at their mean altitude.
Pose centroid_nadir_pose(const std::vector<ViewRecord>& views);

} // namespace understory::cli
