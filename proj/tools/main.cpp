#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "commands.hpp"
#include "understory/errors.hpp"

namespace {

// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical/degeneracy.
constexpr int kConfigExit = 2;
constexpr int kIoExit = 3;
constexpr int kNumericExit = 4;

void print_error(int code, const char* kind, const std::string& message) {
    nlohmann::json j{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    using namespace understory;
    using namespace understory::cli;

    CLI::App app{"understory: synthetic forest rendering, synthetic-aperture refocusing,\n"
                 "visible-thermal fusion and detection scoring"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "understory 0.1.0");

    CommonArgs common;
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "master seed overriding the config's");
    app.add_option("--threads", common.threads, "worker threads (0 = hardware)");

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out;
    app.add_option("--config", config_path, "experiment config JSON");
    app.add_option("--set", overrides, "config override key.path=value (repeatable)");
    app.add_option("--out", out, "output file or directory");

    auto* gen = app.add_subcommand("gen-scene", "generate a procedural forest scene");

    auto* render = app.add_subcommand("render", "render a camera array over a scene");
    std::string scene_path;
    render->add_option("--scene", scene_path, "scene JSON from gen-scene")->required();

    auto* refocus = app.add_subcommand("refocus", "synthetic-aperture integral images");
    std::string views_dir;
    std::string channel = "thermal";
    std::vector<double> heights;
    std::string target_box_text, background_box_text;
    refocus->add_option("--views", views_dir, "directory with cameras.json and images")->required();
    refocus->add_option("--channel", channel, "thermal or visible");
    refocus->add_option("--plane-height", heights, "focal plane height in meters (repeatable)");
    refocus->add_option("--target-box", target_box_text, "explicit target region x0,y0,x1,y1");
    refocus->add_option("--background-box", background_box_text,
                        "explicit background region x0,y0,x1,y1");

    auto* fuse = app.add_subcommand("fuse", "MST-SR visible-thermal fusion");
    std::string visible_path, thermal_path;
    int depth = 3, patch = 8, stride = 2, atoms = 8, dict_atoms = 16;
    double tol = 1e-3;
    fuse->add_option("--visible", visible_path, "visible image")->required();
    fuse->add_option("--thermal", thermal_path, "thermal image")->required();
    fuse->add_option("--depth", depth, "pyramid depth");
    fuse->add_option("--patch", patch, "patch size for base coding");
    fuse->add_option("--stride", stride, "patch stride");
    fuse->add_option("--atoms", atoms, "max OMP atoms per patch");
    fuse->add_option("--dict-atoms", dict_atoms, "dictionary atoms per dimension");
    fuse->add_option("--tol", tol, "OMP residual tolerance");

    auto* evaluate = app.add_subcommand("evaluate", "score detections against ground truth");
    std::string detections_path, ground_truth_path, pr_csv;
    double iou_threshold = 0.5;
    int top_k = 0;
    evaluate->add_option("--detections", detections_path, "detections JSON")->required();
    evaluate->add_option("--ground-truth", ground_truth_path, "ground-truth JSON")->required();
    evaluate->add_option("--iou-threshold", iou_threshold, "match threshold in (0,1]");
    evaluate->add_option("--top-k", top_k, "restrict mAP to the top-k classes by GT count");
    evaluate->add_option("--pr-csv", pr_csv, "also write PR points as CSV");

    auto* summary = app.add_subcommand("class-summary", "per-class instance counts");
    std::string summary_gt, summary_dets;
    summary->add_option("--ground-truth", summary_gt, "ground-truth JSON")->required();
    summary->add_option("--detections", summary_dets, "detections JSON (optional)");

    auto* pipeline =
        app.add_subcommand("pipeline", "gen-scene -> render -> refocus -> fuse, with manifest");

    try {
        app.parse(argc, argv);
        common.seed = seed;

        if (gen->parsed()) {
            if (out.empty()) throw ConfigError("gen-scene: --out directory is required");
            cmd_gen_scene(config_path, overrides, common, out);
        } else if (render->parsed()) {
            if (out.empty()) throw ConfigError("render: --out directory is required");
            cmd_render(scene_path, config_path, overrides, common, out);
        } else if (refocus->parsed()) {
            if (out.empty()) throw ConfigError("refocus: --out directory is required");
            if (heights.empty()) heights.push_back(0.0);
            std::optional<BBoxPx> target, background;
            if (!target_box_text.empty()) target = parse_box(target_box_text);
            if (!background_box_text.empty()) background = parse_box(background_box_text);
            cmd_refocus(views_dir, channel, heights, common, out, target, background);
        } else if (fuse->parsed()) {
            if (out.empty()) throw ConfigError("fuse: --out path is required");
            cmd_fuse(visible_path, thermal_path, out, depth, patch, stride, atoms, dict_atoms, tol,
                     common);
        } else if (evaluate->parsed()) {
            if (out.empty()) throw ConfigError("evaluate: --out report path is required");
            cmd_evaluate(detections_path, ground_truth_path, out, iou_threshold, top_k, pr_csv);
        } else if (summary->parsed()) {
            cmd_class_summary(summary_gt, summary_dets, out);
        } else if (pipeline->parsed()) {
            if (out.empty()) throw ConfigError("pipeline: --out directory is required");
            cmd_pipeline(config_path, overrides, common, out);
        }
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error(kConfigExit, "usage", e.what());
        return kConfigExit;
    } catch (const ConfigError& e) {
        print_error(kConfigExit, "config", e.what());
        return kConfigExit;
    } catch (const IoError& e) {
        print_error(kIoExit, "io", e.what());
        return kIoExit;
    } catch (const NumericError& e) {
        print_error(kNumericExit, "numeric", e.what());
        return kNumericExit;
    } catch (const std::exception& e) {
        print_error(kNumericExit, "internal", e.what());
        return kNumericExit;
    }
}
