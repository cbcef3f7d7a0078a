#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "understory/image.hpp"

namespace understory::cli {

struct CommonArgs {
    std::optional<std::uint64_t> seed; // overrides the config's seed
    int threads = 0;                   // 0 = hardware concurrency
};

void cmd_gen_scene(const std::filesystem::path& config_path,
                   const std::vector<std::string>& overrides, const CommonArgs& common,
                   const std::filesystem::path& out_dir);

void cmd_render(const std::filesystem::path& scene_path, const std::filesystem::path& config_path,
                const std::vector<std::string>& overrides, const CommonArgs& common,
                const std::filesystem::path& out_dir);

void cmd_refocus(const std::filesystem::path& views_dir, const std::string& channel,
                 std::vector<double> plane_heights, const CommonArgs& common,
                 const std::filesystem::path& out_dir, const std::optional<BBoxPx>& target_box,
                 const std::optional<BBoxPx>& background_box);

void cmd_fuse(const std::filesystem::path& visible_path, const std::filesystem::path& thermal_path,
              const std::filesystem::path& out_path, int depth, int patch, int stride,
              int max_atoms, int atoms_per_dim, double tol, const CommonArgs& common);

void cmd_evaluate(const std::filesystem::path& detections_path,
                  const std::filesystem::path& ground_truth_path,
                  const std::filesystem::path& out_path, double iou_threshold, int top_k,
                  const std::filesystem::path& pr_csv_path);

void cmd_class_summary(const std::filesystem::path& ground_truth_path,
                       const std::filesystem::path& detections_path,
                       const std::filesystem::path& out_path);

void cmd_pipeline(const std::filesystem::path& config_path,
                  const std::vector<std::string>& overrides, const CommonArgs& common,
                  const std::filesystem::path& out_dir);

// "0", "2.5", "-1.25": canonical focal-plane height token used in filenames.
std::string format_height(double h);

// "x_min,y_min,x_max,y_max" -> box
BBoxPx parse_box(const std::string& text);

} // namespace understory::cli
