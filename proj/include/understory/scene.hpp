#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "understory/deteval.hpp"
#include "understory/geometry.hpp"
#include "understory/image.hpp"

namespace understory::scene {

// Ground rectangle in meters.
struct Extent {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool contains(double x, double y) const {
        return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
    }
};

// Warm rectangular target lying on the ground plane, axis-aligned:
// [cx - length/2, cx + length/2] x [cy - width/2, cy + width/2].
struct TargetSpec {
    std::string class_label = "person";
    double center_x = 0.0;
    double center_y = 0.0;
    double length = 2.0; // extent along x, meters
    double width = 2.0;  // extent along y, meters
    double visible_albedo = 0.5;
    double thermal_intensity = 0.9;
};

// A tree: a vertical cluster of opaque horizontal leaf discs inside a
// canopy cylinder. Leaves are materialized at generation time so a scene
// file fully determines every render.
struct OccluderSpec {
    double center_x = 0.0;
    double center_y = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;
    double canopy_radius = 0.0;
    int leaf_count = 0;
    double leaf_radius = 0.0;
    double leaf_albedo = 0.45;
    double leaf_thermal = 0.25;
    std::vector<Eigen::Vector3d> leaves; // disc centers, world coordinates
};

struct SceneDescription {
    Extent extent;
    std::uint64_t ground_texture_seed = 0;
    double ambient_thermal = 0.3;
    double noise_sigma = 0.0;
    std::vector<TargetSpec> targets;
    std::vector<OccluderSpec> occluders;

    void validate() const; // throws ConfigError on violated invariants
};

// Knobs for procedural forest synthesis. Targets are listed explicitly;
// trees are placed by seeded rejection sampling.
struct GenerationConfig {
    Extent extent{-20.0, -20.0, 20.0, 20.0};
    int tree_count = 12;
    double min_separation = 2.0;
    double canopy_radius_min = 1.5;
    double canopy_radius_max = 3.0;
    double trunk_height_min = 2.0;
    double trunk_height_max = 4.0;
    double canopy_depth_min = 1.0;
    double canopy_depth_max = 2.5;
    int leaf_count_min = 30;
    int leaf_count_max = 60;
    double leaf_radius = 0.25;
    double leaf_albedo = 0.45;
    double leaf_thermal = 0.25;
    double ambient_thermal = 0.3;
    double noise_sigma = 0.0;
    std::vector<TargetSpec> targets;
};

// Deterministic for fixed (config, seed): identical byte-level scene
// description. Throws NumericError("cannot satisfy separation") when tree
// placement exhausts 10,000 rejected samples.
SceneDescription generate_scene(const GenerationConfig& config, std::uint64_t seed);

// Depth-ordered opaque composite at pixel centers: ground (value-noise
// texture for visible, ambient for thermal), target rectangles on the
// ground, leaf discs at their heights; then additive Gaussian noise
// N(0, noise_sigma^2) keyed by noise_seed, clamped to [0, 1].
ImagePlane render_view(const SceneDescription& scene, const Intrinsics& intr, const Pose& pose,
                       Channel channel, std::uint64_t noise_seed, int threads = 1);

// Geometric ground truth: the axis-aligned hull of each target's four
// projected ground corners, clipped to image bounds. Occlusion is ignored.
std::vector<det::GroundTruthRecord> export_ground_truth(const SceneDescription& scene,
                                                        const Intrinsics& intr, const Pose& pose,
                                                        const std::string& image_id = "");

SceneDescription load_scene(const std::filesystem::path& path);
void save_scene(const SceneDescription& scene, const std::filesystem::path& path);
std::string scene_to_json_string(const SceneDescription& scene);

GenerationConfig generation_config_from_json_file(const std::filesystem::path& path);

} // namespace understory::scene
