#include "experiment.hpp"

#include <fstream>

#include "understory/errors.hpp"

namespace understory::cli {

using nlohmann::json;

Intrinsics ArraySpec::intrinsics() const {
    Intrinsics intr;
    intr.fx = fx;
    intr.fy = fy;
    intr.width = width;
    intr.height = height;
    intr.cx = cx.value_or((width - 1) / 2.0);
    intr.cy = cy.value_or((height - 1) / 2.0);
    intr.validate();
    return intr;
}

namespace {

json parse_override_value(const std::string& text) {
    const json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return json(text);
}

void apply_override(json& document, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("--set expects key.path=value, got '" + assignment + "'");
    std::string pointer = "/";
    for (const char c : assignment.substr(0, eq)) pointer += c == '.' ? '/' : c;
    document[json::json_pointer(pointer)] = parse_override_value(assignment.substr(eq + 1));
}

scene::TargetSpec target_from_json(const json& j) {
    scene::TargetSpec t;
    t.class_label = j.value("class", t.class_label);
    if (j.contains("center")) {
        const auto c = j.at("center").get<std::vector<double>>();
        if (c.size() != 2) throw ConfigError("target: 'center' must hold 2 numbers");
        t.center_x = c[0];
        t.center_y = c[1];
    }
    if (j.contains("size")) {
        const auto s = j.at("size").get<std::vector<double>>();
        if (s.size() != 2) throw ConfigError("target: 'size' must hold 2 numbers");
        t.length = s[0];
        t.width = s[1];
    }
    t.visible_albedo = j.value("visible_albedo", t.visible_albedo);
    t.thermal_intensity = j.value("thermal_intensity", t.thermal_intensity);
    return t;
}

json target_to_json(const scene::TargetSpec& t) {
    return json{{"class", t.class_label},
                {"center", {t.center_x, t.center_y}},
                {"size", {t.length, t.width}},
                {"visible_albedo", t.visible_albedo},
                {"thermal_intensity", t.thermal_intensity}};
}

scene::GenerationConfig scene_config_from_json(const json& j) {
    scene::GenerationConfig c;
    if (j.contains("extent")) {
        const json& e = j.at("extent");
        c.extent = {e.value("x_min", c.extent.x_min), e.value("y_min", c.extent.y_min),
                    e.value("x_max", c.extent.x_max), e.value("y_max", c.extent.y_max)};
    }
    c.tree_count = j.value("tree_count", c.tree_count);
    c.min_separation = j.value("min_separation", c.min_separation);
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto arr = j.at(key).get<std::vector<double>>();
        if (arr.size() != 2) throw ConfigError(std::string("scene: '") + key + "' must hold [min, max]");
        lo = arr[0];
        hi = arr[1];
    };
    range("canopy_radius", c.canopy_radius_min, c.canopy_radius_max);
    range("trunk_height", c.trunk_height_min, c.trunk_height_max);
    range("canopy_depth", c.canopy_depth_min, c.canopy_depth_max);
    if (j.contains("leaf_count")) {
        const auto arr = j.at("leaf_count").get<std::vector<int>>();
        if (arr.size() != 2) throw ConfigError("scene: 'leaf_count' must hold [min, max]");
        c.leaf_count_min = arr[0];
        c.leaf_count_max = arr[1];
    }
    c.leaf_radius = j.value("leaf_radius", c.leaf_radius);
    c.leaf_albedo = j.value("leaf_albedo", c.leaf_albedo);
    c.leaf_thermal = j.value("leaf_thermal", c.leaf_thermal);
    c.ambient_thermal = j.value("ambient_thermal", c.ambient_thermal);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    if (j.contains("targets")) {
        c.targets.clear();
        for (const auto& t : j.at("targets")) c.targets.push_back(target_from_json(t));
    } else if (c.targets.empty()) {
        scene::TargetSpec person;
        person.length = person.width = 2.0;
        c.targets.push_back(person);
    }
    return c;
}

json scene_config_to_json(const scene::GenerationConfig& c) {
    json targets = json::array();
    for (const auto& t : c.targets) targets.push_back(target_to_json(t));
    return json{{"extent",
                 {{"x_min", c.extent.x_min}, {"y_min", c.extent.y_min},
                  {"x_max", c.extent.x_max}, {"y_max", c.extent.y_max}}},
                {"tree_count", c.tree_count},
                {"min_separation", c.min_separation},
                {"canopy_radius", {c.canopy_radius_min, c.canopy_radius_max}},
                {"trunk_height", {c.trunk_height_min, c.trunk_height_max}},
                {"canopy_depth", {c.canopy_depth_min, c.canopy_depth_max}},
                {"leaf_count", {c.leaf_count_min, c.leaf_count_max}},
                {"leaf_radius", c.leaf_radius},
                {"leaf_albedo", c.leaf_albedo},
                {"leaf_thermal", c.leaf_thermal},
                {"ambient_thermal", c.ambient_thermal},
                {"noise_sigma", c.noise_sigma},
                {"targets", targets}};
}

} // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
    ExperimentConfig config;
    config.seed = j.value("seed", config.seed);
    if (j.contains("scene")) config.scene = scene_config_from_json(j.at("scene"));
    else config.scene = scene_config_from_json(json::object());
    if (j.contains("camera_array")) {
        const json& a = j.at("camera_array");
        ArraySpec& s = config.camera_array;
        if (a.contains("grid")) {
            const auto g = a.at("grid").get<std::vector<int>>();
            if (g.size() != 2) throw ConfigError("camera_array: 'grid' must hold [nx, ny]");
            s.grid_x = g[0];
            s.grid_y = g[1];
        }
        s.altitude = a.value("altitude", s.altitude);
        s.spacing = a.value("spacing", s.spacing);
        s.fx = a.value("fx", s.fx);
        s.fy = a.value("fy", s.fy);
        if (a.contains("cx")) s.cx = a.at("cx").get<double>();
        if (a.contains("cy")) s.cy = a.at("cy").get<double>();
        s.width = a.value("image_width", s.width);
        s.height = a.value("image_height", s.height);
        if (s.grid_x < 1 || s.grid_y < 1) throw ConfigError("camera_array: grid dims must be >= 1");
        if (!(s.altitude > 0.0)) throw ConfigError("camera_array: altitude must be > 0");
        if (!(s.spacing >= 0.0)) throw ConfigError("camera_array: spacing must be >= 0");
    }
    if (j.contains("focal_planes")) {
        config.focal_planes = j.at("focal_planes").get<std::vector<double>>();
        if (config.focal_planes.empty()) throw ConfigError("focal_planes must not be empty");
    }
    if (j.contains("fusion")) {
        const json& f = j.at("fusion");
        config.fusion.depth = f.value("depth", config.fusion.depth);
        config.fusion.patch_size = f.value("patch", config.fusion.patch_size);
        config.fusion.stride = f.value("stride", config.fusion.stride);
        config.fusion.max_atoms = f.value("max_atoms", config.fusion.max_atoms);
        config.fusion.atoms_per_dim = f.value("atoms_per_dim", config.fusion.atoms_per_dim);
        config.fusion.omp_tol = f.value("tol", config.fusion.omp_tol);
    }
    if (j.contains("evaluation")) {
        const json& e = j.at("evaluation");
        config.evaluation.iou_threshold = e.value("iou_threshold", config.evaluation.iou_threshold);
        config.evaluation.top_k = e.value("top_k", config.evaluation.top_k);
    }
    return config;
}

json experiment_config_to_json(const ExperimentConfig& config) {
    const ArraySpec& s = config.camera_array;
    json array{{"grid", {s.grid_x, s.grid_y}}, {"altitude", s.altitude},
               {"spacing", s.spacing},        {"fx", s.fx},
               {"fy", s.fy},                  {"image_width", s.width},
               {"image_height", s.height}};
    if (s.cx) array["cx"] = *s.cx;
    if (s.cy) array["cy"] = *s.cy;
    return json{{"seed", config.seed},
                {"scene", scene_config_to_json(config.scene)},
                {"camera_array", array},
                {"focal_planes", config.focal_planes},
                {"fusion",
                 {{"depth", config.fusion.depth},
                  {"patch", config.fusion.patch_size},
                  {"stride", config.fusion.stride},
                  {"max_atoms", config.fusion.max_atoms},
                  {"atoms_per_dim", config.fusion.atoms_per_dim},
                  {"tol", config.fusion.omp_tol}}},
                {"evaluation",
                 {{"iou_threshold", config.evaluation.iou_threshold},
                  {"top_k", config.evaluation.top_k}}}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const std::vector<std::string>& overrides) {
    json document = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open experiment config '" + path.string() + "'");
        try {
            document = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("invalid experiment config '" + path.string() + "': " + e.what());
        }
    }
    try {
        for (const auto& assignment : overrides) apply_override(document, assignment);
        return experiment_config_from_json(document);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
}

std::vector<Pose> build_grid_poses(const ArraySpec& spec, double center_x, double center_y) {
    std::vector<Pose> poses;
    poses.reserve(static_cast<std::size_t>(spec.grid_x) * spec.grid_y);
    for (int j = 0; j < spec.grid_y; ++j)
        for (int i = 0; i < spec.grid_x; ++i) {
            const double x = center_x + (i - (spec.grid_x - 1) / 2.0) * spec.spacing;
            const double y = center_y + (j - (spec.grid_y - 1) / 2.0) * spec.spacing;
            Pose pose;
            pose.rotation = nadir_rotation();
            pose.translation = -pose.rotation * Eigen::Vector3d(x, y, spec.altitude);
            poses.push_back(pose);
        }
    return poses;
}

Pose centroid_nadir_pose(const std::vector<ViewRecord>& views) {
    if (views.empty()) throw ConfigError("camera array has no views");
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& v : views) centroid += v.pose.camera_center();
    centroid /= static_cast<double>(views.size());
    Pose pose;
    pose.rotation = nadir_rotation();
    pose.translation = -pose.rotation * centroid;
    return pose;
}

} // namespace understory::cli
