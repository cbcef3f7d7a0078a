#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "experiment.hpp"
#include "understory/aos.hpp"
#include "understory/deteval.hpp"
#include "understory/errors.hpp"
#include "understory/image_io.hpp"
#include "understory/rng.hpp"
#include "understory/sha256.hpp"

namespace understory::cli {

using nlohmann::json;

namespace {

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_json(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write for '" + path.string() + "'");
}

std::string view_id(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "view_%03d", index);
    return buf;
}

bool disjoint(const BBoxPx& a, const BBoxPx& b) {
    return a.x_max < b.x_min || b.x_max < a.x_min || a.y_max < b.y_min || b.y_max < a.y_min;
}

// Same-size background box probed right/left/below/above the target,
// inside the image and clear of every target box.
std::optional<BBoxPx> place_background(const BBoxPx& target, const std::vector<BBoxPx>& keep_clear,
                                       int width, int height) {
    const double w = target.x_max - target.x_min;
    const double h = target.y_max - target.y_min;
    const double gap = 8.0;
    const double dx[4] = {w + gap, -(w + gap), 0.0, 0.0};
    const double dy[4] = {0.0, 0.0, h + gap, -(h + gap)};
    for (int k = 0; k < 4; ++k) {
        const BBoxPx cand{target.x_min + dx[k], target.y_min + dy[k], target.x_max + dx[k],
                          target.y_max + dy[k]};
        if (cand.x_min < 0.0 || cand.y_min < 0.0 || cand.x_max > width - 1 || cand.y_max > height - 1)
            continue;
        bool clear = true;
        for (const auto& other : keep_clear)
            if (!disjoint(cand, other)) {
                clear = false;
                break;
            }
        if (clear) return cand;
    }
    return std::nullopt;
}

json box_json(const BBoxPx& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

ImagePlane normalized_coverage(const ImagePlane& coverage, int n_views) {
    ImagePlane out = coverage;
    for (auto& v : out.data()) v /= static_cast<float>(n_views);
    return out;
}

struct RenderedArray {
    CameraArray array;
    std::vector<det::GroundTruthRecord> ground_truth;
};

RenderedArray render_array(const scene::SceneDescription& sc, const ExperimentConfig& config,
                           std::uint64_t seed, int threads, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    const Intrinsics intr = config.camera_array.intrinsics();
    const double center_x = (sc.extent.x_min + sc.extent.x_max) / 2.0;
    const double center_y = (sc.extent.y_min + sc.extent.y_max) / 2.0;
    const std::vector<Pose> poses = build_grid_poses(config.camera_array, center_x, center_y);

    RenderedArray result;
    result.array.intrinsics = intr;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const std::string id = view_id(static_cast<int>(i));
        ViewRecord rec;
        rec.pose = poses[i];
        rec.image_vis = id + "_vis.png";
        rec.image_thm = id + "_thm.png";

        const ImagePlane vis = scene::render_view(sc, intr, poses[i], Channel::visible,
                                                  derive_seed(seed, "noise-vis", i), threads);
        const ImagePlane thm = scene::render_view(sc, intr, poses[i], Channel::thermal,
                                                  derive_seed(seed, "noise-thm", i), threads);
        write_image(vis, out_dir / rec.image_vis);
        write_image(thm, out_dir / rec.image_thm);

        for (auto gt : scene::export_ground_truth(sc, intr, poses[i], id))
            result.ground_truth.push_back(std::move(gt));
        result.array.views.push_back(std::move(rec));
    }
    save_camera_array(result.array, out_dir / "cameras.json");
    det::save_ground_truth(result.ground_truth, out_dir / "ground_truth.json");
    scene::save_scene(sc, out_dir / "scene.json");
    return result;
}

struct SweepOutput {
    std::vector<std::filesystem::path> files;
    json report;
};

SweepOutput refocus_views(const std::filesystem::path& views_dir, Channel channel,
                          const std::vector<double>& heights, int threads,
                          const std::filesystem::path& out_dir,
                          const std::optional<BBoxPx>& target_box,
                          const std::optional<BBoxPx>& background_box) {
    if (heights.empty()) throw ConfigError("refocus: needs at least one focal-plane height");
    ensure_dir(out_dir);
    const CameraArray array = load_camera_array(views_dir / "cameras.json");

    aos::ViewSet views;
    for (const auto& rec : array.views) {
        const std::string& name = channel == Channel::thermal ? rec.image_thm : rec.image_vis;
        ImagePlane img = read_image(views_dir / name, channel);
        img.set_channel(channel);
        views.views.push_back({array.intrinsics, rec.pose, std::move(img)});
    }
    const Intrinsics ref_intr = array.intrinsics;
    const Pose ref_pose = centroid_nadir_pose(array.views);

    // target regions in the reference raster: explicit boxes win, otherwise
    // re-project the scene's targets through the reference camera
    std::vector<BBoxPx> targets;
    if (target_box) {
        targets.push_back(*target_box);
    } else if (std::filesystem::exists(views_dir / "scene.json")) {
        const auto sc = scene::load_scene(views_dir / "scene.json");
        for (const auto& gt : scene::export_ground_truth(sc, ref_intr, ref_pose, "reference"))
            targets.push_back(gt.box);
    }

    std::vector<WorldPlane> planes;
    for (const double h : heights) planes.push_back(WorldPlane{Eigen::Vector3d::UnitZ(), h});
    const auto integrals = aos::focal_sweep(views, planes, ref_intr, ref_pose,
                                            aos::Weighting::uniform, nullptr, threads);

    SweepOutput out;
    json plane_reports = json::array();
    for (std::size_t k = 0; k < planes.size(); ++k) {
        const std::string tag = format_height(heights[k]);
        const auto integral_path = out_dir / ("integral_" + tag + ".png");
        const auto coverage_path = out_dir / ("coverage_" + tag + ".png");
        write_image(integrals[k].image, integral_path);
        write_image(normalized_coverage(integrals[k].coverage, integrals[k].n_views), coverage_path);
        out.files.push_back(integral_path);
        out.files.push_back(coverage_path);

        json scores = json::array();
        double sum = 0.0;
        int scored = 0;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            std::optional<BBoxPx> bg = background_box;
            if (!bg) bg = place_background(targets[t], targets, ref_intr.width, ref_intr.height);
            if (!bg || !disjoint(targets[t], *bg)) continue;
            const double score = aos::visibility_score(integrals[k].image, targets[t], *bg);
            scores.push_back(json{{"target", t},
                                  {"target_box", box_json(targets[t])},
                                  {"background_box", box_json(*bg)},
                                  {"score", score}});
            sum += score;
            ++scored;
        }
        json entry{{"height", heights[k]},
                   {"integral", integral_path.filename().string()},
                   {"coverage", coverage_path.filename().string()},
                   {"visibility", scores}};
        if (scored > 0) entry["mean_visibility"] = sum / scored;
        plane_reports.push_back(std::move(entry));
    }
    out.report = json{{"channel", channel_name(channel)},
                      {"n_views", static_cast<int>(views.views.size())},
                      {"planes", plane_reports}};
    write_json(out.report, out_dir / "sweep_report.json");
    out.files.push_back(out_dir / "sweep_report.json");
    return out;
}

} // namespace

std::string format_height(double h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", h);
    return buf;
}

BBoxPx parse_box(const std::string& text) {
    BBoxPx box;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf,%lf", &box.x_min, &box.y_min, &box.x_max,
                    &box.y_max) != 4 ||
        !box.valid())
        throw ConfigError("expected a box as x_min,y_min,x_max,y_max with positive extent, got '" +
                          text + "'");
    return box;
}

void cmd_gen_scene(const std::filesystem::path& config_path,
                   const std::vector<std::string>& overrides, const CommonArgs& common,
                   const std::filesystem::path& out_dir) {
    const ExperimentConfig config = load_experiment_config(config_path, overrides);
    const std::uint64_t seed = common.seed.value_or(config.seed);
    const auto sc = scene::generate_scene(config.scene, derive_seed(seed, "scene"));
    ensure_dir(out_dir);
    scene::save_scene(sc, out_dir / "scene.json");
    std::cout << "wrote " << (out_dir / "scene.json").string() << "\n";
}

void cmd_render(const std::filesystem::path& scene_path, const std::filesystem::path& config_path,
                const std::vector<std::string>& overrides, const CommonArgs& common,
                const std::filesystem::path& out_dir) {
    const ExperimentConfig config = load_experiment_config(config_path, overrides);
    const std::uint64_t seed = common.seed.value_or(config.seed);
    const auto sc = scene::load_scene(scene_path);
    const RenderedArray rendered = render_array(sc, config, seed, common.threads, out_dir);
    std::cout << "wrote " << rendered.array.views.size() << " view pairs to " << out_dir.string()
              << "\n";
}

void cmd_refocus(const std::filesystem::path& views_dir, const std::string& channel,
                 std::vector<double> plane_heights, const CommonArgs& common,
                 const std::filesystem::path& out_dir, const std::optional<BBoxPx>& target_box,
                 const std::optional<BBoxPx>& background_box) {
    const Channel ch = channel_from_name(channel);
    if (ch != Channel::thermal && ch != Channel::visible)
        throw ConfigError("refocus: channel must be 'thermal' or 'visible'");
    const SweepOutput out = refocus_views(views_dir, ch, plane_heights, common.threads, out_dir,
                                          target_box, background_box);
    std::cout << "wrote " << out.files.size() << " artifacts to " << out_dir.string() << "\n";
}

void cmd_fuse(const std::filesystem::path& visible_path, const std::filesystem::path& thermal_path,
              const std::filesystem::path& out_path, int depth, int patch, int stride,
              int max_atoms, int atoms_per_dim, double tol, const CommonArgs& common) {
    fusion::FusionConfig config;
    config.depth = depth;
    config.patch_size = patch;
    config.stride = stride;
    config.max_atoms = max_atoms;
    config.atoms_per_dim = atoms_per_dim;
    config.omp_tol = tol;

    const ImagePlane visible = read_image(visible_path, Channel::visible);
    const ImagePlane thermal = read_image(thermal_path, Channel::thermal);
    const ImagePlane fused = fusion::mst_sr_fuse(visible, thermal, config, common.threads);
    write_image(fused, out_path);
    std::cout << "wrote " << out_path.string() << "\n";
}

void cmd_evaluate(const std::filesystem::path& detections_path,
                  const std::filesystem::path& ground_truth_path,
                  const std::filesystem::path& out_path, double iou_threshold, int top_k,
                  const std::filesystem::path& pr_csv_path) {
    const auto detections = det::load_detections(detections_path);
    const auto ground_truth = det::load_ground_truth(ground_truth_path);
    const det::EvalReport report =
        det::evaluate_detections(detections, ground_truth, iou_threshold, top_k);
    det::write_report(report, out_path);
    if (!pr_csv_path.empty()) det::write_pr_csv(report, pr_csv_path);
    std::cout << "mAP@" << iou_threshold << " = " << report.map << " over "
              << report.per_class.size() << " classes\n";
}

void cmd_class_summary(const std::filesystem::path& ground_truth_path,
                       const std::filesystem::path& detections_path,
                       const std::filesystem::path& out_path) {
    const auto ground_truth = det::load_ground_truth(ground_truth_path);
    std::vector<det::DetectionRecord> detections;
    if (!detections_path.empty()) detections = det::load_detections(detections_path);
    const auto counts = det::class_summary(ground_truth, detections);
    std::cout << "class            ground_truth  detections\n";
    for (const auto& c : counts) {
        std::printf("%-16s %12d  %10d\n", c.class_label.c_str(), c.ground_truth, c.detections);
    }
    if (!out_path.empty()) det::write_class_summary(counts, out_path);
}

void cmd_pipeline(const std::filesystem::path& config_path,
                  const std::vector<std::string>& overrides, const CommonArgs& common,
                  const std::filesystem::path& out_dir) {
    ExperimentConfig config = load_experiment_config(config_path, overrides);
    if (common.seed) config.seed = *common.seed;
    ensure_dir(out_dir);
    write_json(experiment_config_to_json(config), out_dir / "config.json");

    const auto sc = scene::generate_scene(config.scene, derive_seed(config.seed, "scene"));
    scene::save_scene(sc, out_dir / "scene.json");

    const auto views_dir = out_dir / "views";
    render_array(sc, config, config.seed, common.threads, views_dir);

    refocus_views(views_dir, Channel::thermal, config.focal_planes, common.threads,
                  out_dir / "refocus_thm", std::nullopt, std::nullopt);
    refocus_views(views_dir, Channel::visible, config.focal_planes, common.threads,
                  out_dir / "refocus_vis", std::nullopt, std::nullopt);

    const auto fused_dir = out_dir / "fused";
    ensure_dir(fused_dir);
    for (const double h : config.focal_planes) {
        const std::string tag = format_height(h);
        const ImagePlane iv =
            read_image(out_dir / "refocus_vis" / ("integral_" + tag + ".png"), Channel::visible);
        const ImagePlane it =
            read_image(out_dir / "refocus_thm" / ("integral_" + tag + ".png"), Channel::thermal);
        const ImagePlane fused = fusion::mst_sr_fuse(iv, it, config.fusion, common.threads);
        write_image(fused, fused_dir / ("fused_" + tag + ".png"));
    }

    // manifest of every artifact, hashed, path-sorted
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(out_dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "manifest.json") continue;
        files.push_back(std::filesystem::relative(entry.path(), out_dir));
    }
    std::sort(files.begin(), files.end());
    json artifacts = json::array();
    for (const auto& rel : files)
        artifacts.push_back(json{{"path", rel.generic_string()},
                                 {"sha256", sha256_file_hex(out_dir / rel)}});
    write_json(json{{"seed", config.seed}, {"artifacts", artifacts}}, out_dir / "manifest.json");
    std::cout << "wrote " << files.size() << " artifacts and manifest to " << out_dir.string()
              << "\n";
}

} // namespace understory::cli
