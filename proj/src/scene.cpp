#include "understory/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "understory/errors.hpp"
#include "understory/parallel.hpp"
#include "understory/rng.hpp"

namespace understory::scene {

using detail::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kRejectionBudget = 10000;

void validate_extent(const Extent& e) {
    if (!(e.x_min < e.x_max && e.y_min < e.y_max))
        throw ConfigError("extent: requires x_min < x_max and y_min < y_max");
}

void validate_target(const TargetSpec& t, const Extent& extent, double ambient_thermal) {
    if (!(t.length > 0.0 && t.width > 0.0)) throw ConfigError("target: size components must be > 0");
    if (!(t.visible_albedo >= 0.0 && t.visible_albedo <= 1.0))
        throw ConfigError("target: visible_albedo outside [0, 1]");
    if (!(t.thermal_intensity >= 0.0 && t.thermal_intensity <= 1.0))
        throw ConfigError("target: thermal_intensity outside [0, 1]");
    if (!(t.thermal_intensity > ambient_thermal))
        throw ConfigError("target: thermal_intensity must exceed ambient_thermal");
    if (!extent.contains(t.center_x, t.center_y)) throw ConfigError("target: center outside extent");
}

void validate_occluder(const OccluderSpec& o, const Extent& extent) {
    if (!(o.z_min > 0.0 && o.z_max > o.z_min))
        throw ConfigError("occluder: height band must satisfy z_max > z_min > 0");
    if (!(o.canopy_radius > 0.0)) throw ConfigError("occluder: canopy_radius must be > 0");
    if (o.leaf_count < 1) throw ConfigError("occluder: leaf_count must be >= 1");
    if (!(o.leaf_radius > 0.0)) throw ConfigError("occluder: leaf_radius must be > 0");
    if (!extent.contains(o.center_x, o.center_y)) throw ConfigError("occluder: center outside extent");
}

// Ground visible albedo: seeded value noise, mid-range band.
double ground_albedo(double x, double y, std::uint64_t seed) {
    return 0.25 + 0.5 * value_noise(x, y, seed);
}

struct Ray {
    Eigen::Vector3d origin;
    Eigen::Vector3d dir; // not normalized; parameterized as origin + t * dir
};

Ray pixel_ray(const Intrinsics& intr, const Eigen::Matrix3d& rot_t, const Eigen::Vector3d& center,
              double u, double v) {
    const Eigen::Vector3d dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
    return Ray{center, rot_t * dir_cam};
}

} // namespace

void SceneDescription::validate() const {
    validate_extent(extent);
    if (!(noise_sigma >= 0.0)) throw ConfigError("scene: noise_sigma must be >= 0");
    if (!(ambient_thermal >= 0.0 && ambient_thermal <= 1.0))
        throw ConfigError("scene: ambient_thermal outside [0, 1]");
    for (const auto& t : targets) validate_target(t, extent, ambient_thermal);
    for (const auto& o : occluders) validate_occluder(o, extent);
}

SceneDescription generate_scene(const GenerationConfig& config, std::uint64_t seed) {
    validate_extent(config.extent);
    if (config.tree_count < 0) throw ConfigError("generation: tree_count must be >= 0");
    if (!(config.min_separation >= 0.0)) throw ConfigError("generation: min_separation must be >= 0");
    if (!(config.canopy_radius_min > 0.0 && config.canopy_radius_max >= config.canopy_radius_min))
        throw ConfigError("generation: canopy_radius range invalid");
    if (!(config.trunk_height_min > 0.0 && config.trunk_height_max >= config.trunk_height_min))
        throw ConfigError("generation: trunk_height range invalid");
    if (!(config.canopy_depth_min > 0.0 && config.canopy_depth_max >= config.canopy_depth_min))
        throw ConfigError("generation: canopy_depth range invalid");
    if (config.leaf_count_min < 1 || config.leaf_count_max < config.leaf_count_min)
        throw ConfigError("generation: leaf_count range invalid");
    if (!(config.leaf_radius > 0.0)) throw ConfigError("generation: leaf_radius must be > 0");

    SceneDescription scene;
    scene.extent = config.extent;
    scene.ambient_thermal = config.ambient_thermal;
    scene.noise_sigma = config.noise_sigma;
    scene.targets = config.targets;
    scene.ground_texture_seed = derive_seed(seed, "ground-texture");

    SeededRng rng(derive_seed(seed, "tree-placement"));
    int rejections = 0;
    for (int tree = 0; tree < config.tree_count; ++tree) {
        OccluderSpec occ;
        occ.leaf_radius = config.leaf_radius;
        occ.leaf_albedo = config.leaf_albedo;
        occ.leaf_thermal = config.leaf_thermal;
        for (;;) {
            occ.canopy_radius = rng.uniform(config.canopy_radius_min, config.canopy_radius_max);
            const double margin = occ.canopy_radius;
            const bool fits_x = config.extent.x_min + margin < config.extent.x_max - margin;
            const bool fits_y = config.extent.y_min + margin < config.extent.y_max - margin;
            bool ok = fits_x && fits_y;
            if (ok) {
                occ.center_x = rng.uniform(config.extent.x_min + margin, config.extent.x_max - margin);
                occ.center_y = rng.uniform(config.extent.y_min + margin, config.extent.y_max - margin);
                for (const auto& other : scene.occluders) {
                    const double dx = occ.center_x - other.center_x;
                    const double dy = occ.center_y - other.center_y;
                    if (dx * dx + dy * dy < config.min_separation * config.min_separation) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) break;
            if (++rejections >= kRejectionBudget) throw NumericError("cannot satisfy separation");
        }
        occ.z_min = rng.uniform(config.trunk_height_min, config.trunk_height_max);
        occ.z_max = occ.z_min + rng.uniform(config.canopy_depth_min, config.canopy_depth_max);
        occ.leaf_count = rng.uniform_int(config.leaf_count_min, config.leaf_count_max);
        const double spread = std::max(0.0, occ.canopy_radius - occ.leaf_radius);
        occ.leaves.reserve(occ.leaf_count);
        for (int i = 0; i < occ.leaf_count; ++i) {
            const double r = spread * std::sqrt(rng.uniform());
            const double theta = 2.0 * kPi * rng.uniform();
            const double z = rng.uniform(occ.z_min, occ.z_max);
            occ.leaves.emplace_back(occ.center_x + r * std::cos(theta),
                                    occ.center_y + r * std::sin(theta), z);
        }
        scene.occluders.push_back(std::move(occ));
    }
    scene.validate();
    return scene;
}

ImagePlane render_view(const SceneDescription& scene, const Intrinsics& intr, const Pose& pose,
                       Channel channel, std::uint64_t noise_seed, int threads) {
    scene.validate();
    intr.validate();
    pose.validate();
    if (channel != Channel::visible && channel != Channel::thermal)
        throw ConfigError("render_view: renderable channels are visible and thermal");
    const Eigen::Vector3d cam = pose.camera_center();
    if (!(cam.z() > 0.0)) throw ConfigError("render_view: camera below ground plane");

    const bool thermal = channel == Channel::thermal;
    const Eigen::Matrix3d rot_t = pose.rotation.transpose();
    const int w = intr.width;
    const int h = intr.height;
    ImagePlane img(w, h, channel);
    std::vector<double> depth(static_cast<std::size_t>(w) * h,
                              std::numeric_limits<double>::infinity());
    std::vector<double> value(static_cast<std::size_t>(w) * h, 0.0);

    // Base pass: ground plane and on-ground target rectangles.
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const Ray ray = pixel_ray(intr, rot_t, cam, x, y);
            double v = thermal ? scene.ambient_thermal : 0.0; // sky fallback
            if (ray.dir.z() < 0.0) {
                const double t = -cam.z() / ray.dir.z();
                const double gx = cam.x() + t * ray.dir.x();
                const double gy = cam.y() + t * ray.dir.y();
                v = thermal ? scene.ambient_thermal : ground_albedo(gx, gy, scene.ground_texture_seed);
                for (const auto& target : scene.targets) { // later targets paint over earlier
                    if (std::abs(gx - target.center_x) <= target.length * 0.5 &&
                        std::abs(gy - target.center_y) <= target.width * 0.5)
                        v = thermal ? target.thermal_intensity : target.visible_albedo;
                }
                depth[i] = t;
            }
            value[i] = v;
        }
    });

    // Leaf discs, z-buffered; each disc touches only its projected footprint.
    for (const auto& occ : scene.occluders) {
        const double leaf_value = thermal ? occ.leaf_thermal : occ.leaf_albedo;
        for (const auto& leaf : occ.leaves) {
            const double r = occ.leaf_radius;
            int x_lo = 0, x_hi = w - 1, y_lo = 0, y_hi = h - 1;
            bool bounded = true;
            double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
            double v_min = u_min, v_max = -u_min;
            for (int corner = 0; corner < 4; ++corner) {
                const double dx = (corner & 1) ? r : -r;
                const double dy = (corner & 2) ? r : -r;
                const auto px = project(intr, pose, leaf + Eigen::Vector3d(dx, dy, 0.0));
                if (!px) {
                    bounded = false;
                    break;
                }
                u_min = std::min(u_min, px->x());
                u_max = std::max(u_max, px->x());
                v_min = std::min(v_min, px->y());
                v_max = std::max(v_max, px->y());
            }
            if (bounded) {
                x_lo = std::max(0, static_cast<int>(std::ceil(u_min)));
                x_hi = std::min(w - 1, static_cast<int>(std::floor(u_max)));
                y_lo = std::max(0, static_cast<int>(std::ceil(v_min)));
                y_hi = std::min(h - 1, static_cast<int>(std::floor(v_max)));
                if (x_lo > x_hi || y_lo > y_hi) continue;
            }
            for (int y = y_lo; y <= y_hi; ++y) {
                for (int x = x_lo; x <= x_hi; ++x) {
                    const Ray ray = pixel_ray(intr, rot_t, cam, x, y);
                    if (ray.dir.z() == 0.0) continue;
                    const double t = (leaf.z() - cam.z()) / ray.dir.z();
                    if (t <= 1e-9) continue;
                    const std::size_t i = static_cast<std::size_t>(y) * w + x;
                    if (t >= depth[i]) continue;
                    const double hx = cam.x() + t * ray.dir.x() - leaf.x();
                    const double hy = cam.y() + t * ray.dir.y() - leaf.y();
                    if (hx * hx + hy * hy <= r * r) {
                        depth[i] = t;
                        value[i] = leaf_value;
                    }
                }
            }
        }
    }

    const double sigma = scene.noise_sigma;
    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            double v = value[i];
            if (sigma > 0.0) v += sigma * counter_gaussian(noise_seed, i);
            img.at(x, y) = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    });
    return img;
}

std::vector<det::GroundTruthRecord> export_ground_truth(const SceneDescription& scene,
                                                        const Intrinsics& intr, const Pose& pose,
                                                        const std::string& image_id) {
    scene.validate();
    intr.validate();
    pose.validate();
    std::vector<det::GroundTruthRecord> records;
    for (const auto& target : scene.targets) {
        double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
        double v_min = u_min, v_max = -u_min;
        bool all_visible = true;
        for (int corner = 0; corner < 4; ++corner) {
            const double dx = (corner & 1) ? target.length * 0.5 : -target.length * 0.5;
            const double dy = (corner & 2) ? target.width * 0.5 : -target.width * 0.5;
            const auto px = project(intr, pose,
                                    Eigen::Vector3d(target.center_x + dx, target.center_y + dy, 0.0));
            if (!px) {
                all_visible = false;
                break;
            }
            u_min = std::min(u_min, px->x());
            u_max = std::max(u_max, px->x());
            v_min = std::min(v_min, px->y());
            v_max = std::max(v_max, px->y());
        }
        if (!all_visible) continue;

        BBoxPx box{std::max(0.0, u_min), std::max(0.0, v_min),
                   std::min(static_cast<double>(intr.width - 1), u_max),
                   std::min(static_cast<double>(intr.height - 1), v_max)};
        if (!box.valid()) continue; // footprint does not intersect the image
        records.push_back({image_id, target.class_label, box});
    }
    return records;
}

namespace {

json extent_to_json(const Extent& e) {
    return json{{"x_min", e.x_min}, {"y_min", e.y_min}, {"x_max", e.x_max}, {"y_max", e.y_max}};
}

Extent extent_from_json(const json& j) {
    Extent e;
    e.x_min = detail::require<double>(j, "x_min", "extent");
    e.y_min = detail::require<double>(j, "y_min", "extent");
    e.x_max = detail::require<double>(j, "x_max", "extent");
    e.y_max = detail::require<double>(j, "y_max", "extent");
    return e;
}

json target_to_json(const TargetSpec& t) {
    return json{{"class", t.class_label},
                {"center", {t.center_x, t.center_y}},
                {"size", {t.length, t.width}},
                {"visible_albedo", t.visible_albedo},
                {"thermal_intensity", t.thermal_intensity}};
}

TargetSpec target_from_json(const json& j) {
    TargetSpec t;
    t.class_label = detail::require<std::string>(j, "class", "target");
    const auto center = detail::require<std::vector<double>>(j, "center", "target");
    const auto size = detail::require<std::vector<double>>(j, "size", "target");
    if (center.size() != 2 || size.size() != 2)
        throw ConfigError("target: 'center' and 'size' must hold 2 numbers each");
    t.center_x = center[0];
    t.center_y = center[1];
    t.length = size[0];
    t.width = size[1];
    t.visible_albedo = detail::require<double>(j, "visible_albedo", "target");
    t.thermal_intensity = detail::require<double>(j, "thermal_intensity", "target");
    return t;
}

json scene_to_json(const SceneDescription& scene) {
    json targets = json::array();
    for (const auto& t : scene.targets) targets.push_back(target_to_json(t));
    json occluders = json::array();
    for (const auto& o : scene.occluders) {
        json leaves = json::array();
        for (const auto& l : o.leaves) leaves.push_back(json::array({l.x(), l.y(), l.z()}));
        occluders.push_back(json{{"center", {o.center_x, o.center_y}},
                                 {"height_band", {o.z_min, o.z_max}},
                                 {"canopy_radius", o.canopy_radius},
                                 {"leaf_count", o.leaf_count},
                                 {"leaf_radius", o.leaf_radius},
                                 {"leaf_albedo", o.leaf_albedo},
                                 {"leaf_thermal", o.leaf_thermal},
                                 {"leaves", leaves}});
    }
    return json{{"extent", extent_to_json(scene.extent)},
                {"ground_texture_seed", scene.ground_texture_seed},
                {"ambient_thermal", scene.ambient_thermal},
                {"noise_sigma", scene.noise_sigma},
                {"targets", targets},
                {"occluders", occluders}};
}

SceneDescription scene_from_json(const json& j) {
    SceneDescription scene;
    scene.extent = extent_from_json(detail::require<json>(j, "extent", "scene"));
    scene.ground_texture_seed = detail::require<std::uint64_t>(j, "ground_texture_seed", "scene");
    scene.ambient_thermal = detail::require<double>(j, "ambient_thermal", "scene");
    scene.noise_sigma = detail::require<double>(j, "noise_sigma", "scene");
    for (const auto& t : detail::require<json>(j, "targets", "scene"))
        scene.targets.push_back(target_from_json(t));
    for (const auto& oj : detail::require<json>(j, "occluders", "scene")) {
        OccluderSpec o;
        const auto center = detail::require<std::vector<double>>(oj, "center", "occluder");
        const auto band = detail::require<std::vector<double>>(oj, "height_band", "occluder");
        if (center.size() != 2 || band.size() != 2)
            throw ConfigError("occluder: 'center' and 'height_band' must hold 2 numbers each");
        o.center_x = center[0];
        o.center_y = center[1];
        o.z_min = band[0];
        o.z_max = band[1];
        o.canopy_radius = detail::require<double>(oj, "canopy_radius", "occluder");
        o.leaf_count = detail::require<int>(oj, "leaf_count", "occluder");
        o.leaf_radius = detail::require<double>(oj, "leaf_radius", "occluder");
        o.leaf_albedo = detail::require<double>(oj, "leaf_albedo", "occluder");
        o.leaf_thermal = detail::require<double>(oj, "leaf_thermal", "occluder");
        const json leaves = detail::require<json>(oj, "leaves", "occluder");
        for (const auto& l : leaves) {
            const auto p = l.get<std::vector<double>>();
            if (p.size() != 3) throw ConfigError("occluder: each leaf must hold [x, y, z]");
            o.leaves.emplace_back(p[0], p[1], p[2]);
        }
        if (static_cast<int>(o.leaves.size()) != o.leaf_count)
            throw ConfigError("occluder: leaf_count does not match the leaves array");
        scene.occluders.push_back(std::move(o));
    }
    scene.validate();
    return scene;
}

} // namespace

SceneDescription load_scene(const std::filesystem::path& path) {
    return scene_from_json(detail::load_json_file(path, "scene file"));
}

void save_scene(const SceneDescription& scene, const std::filesystem::path& path) {
    scene.validate();
    detail::save_json_file(scene_to_json(scene), path, "scene file");
}

std::string scene_to_json_string(const SceneDescription& scene) {
    return scene_to_json(scene).dump(2);
}

GenerationConfig generation_config_from_json_file(const std::filesystem::path& path) {
    const json j = detail::load_json_file(path, "generation config");
    GenerationConfig config;
    if (j.contains("extent")) config.extent = extent_from_json(j.at("extent"));
    config.tree_count = detail::optional_field<int>(j, "tree_count", config.tree_count);
    config.min_separation = detail::optional_field<double>(j, "min_separation", config.min_separation);
    auto range = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto arr = j.at(key).get<std::vector<double>>();
        if (arr.size() != 2) throw ConfigError(std::string("generation: '") + key + "' must hold [min, max]");
        lo = arr[0];
        hi = arr[1];
    };
    range("canopy_radius", config.canopy_radius_min, config.canopy_radius_max);
    range("trunk_height", config.trunk_height_min, config.trunk_height_max);
    range("canopy_depth", config.canopy_depth_min, config.canopy_depth_max);
    if (j.contains("leaf_count")) {
        const auto arr = j.at("leaf_count").get<std::vector<int>>();
        if (arr.size() != 2) throw ConfigError("generation: 'leaf_count' must hold [min, max]");
        config.leaf_count_min = arr[0];
        config.leaf_count_max = arr[1];
    }
    config.leaf_radius = detail::optional_field<double>(j, "leaf_radius", config.leaf_radius);
    config.leaf_albedo = detail::optional_field<double>(j, "leaf_albedo", config.leaf_albedo);
    config.leaf_thermal = detail::optional_field<double>(j, "leaf_thermal", config.leaf_thermal);
    config.ambient_thermal = detail::optional_field<double>(j, "ambient_thermal", config.ambient_thermal);
    config.noise_sigma = detail::optional_field<double>(j, "noise_sigma", config.noise_sigma);
    if (j.contains("targets")) {
        config.targets.clear();
        for (const auto& t : j.at("targets")) config.targets.push_back(target_from_json(t));
    }
    return config;
}

} // namespace understory::scene
