#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "understory/image.hpp"

namespace understory::det {

struct DetectionRecord {
    std::string image_id;
    std::string class_label;
    BBoxPx box;
    double score = 0.0;
};

struct GroundTruthRecord {
    std::string image_id;
    std::string class_label;
    BBoxPx box;
};

struct PRPoint {
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points; // one per detection, recalls non-decreasing
    int n_gt = 0;
};

// Intersection-over-union of two axis-aligned boxes; 0 for empty intersection.
double iou(const BBoxPx& a, const BBoxPx& b);

// Matching protocol (pinned for reproducibility): per class, detections are
// processed in descending score, ties broken by image_id then input order;
// each detection matches the unmatched same-image ground truth with highest
// IoU >= threshold (GT ties broken by input order). One GT matches at most
// one detection.
std::vector<bool> match_detections(const std::vector<DetectionRecord>& detections,
                                   const std::vector<GroundTruthRecord>& ground_truth,
                                   double iou_threshold);

// A detection of one class, already matched, ready for PR accumulation.
struct LabeledDetection {
    double score = 0.0;
    std::string image_id;
    int input_index = 0;
    bool tp = false;
};

PRCurve pr_curve(std::vector<LabeledDetection> detections, int n_gt);

// All-point interpolated AP (area under the monotone precision envelope).
// Undefined (nullopt) when the curve has no ground truth.
std::optional<double> average_precision(const PRCurve& curve);

struct ClassEval {
    std::string class_label;
    int n_gt = 0;
    int n_detections = 0;
    PRCurve curve;
    std::optional<double> ap;
};

// Unweighted mean over classes with defined AP, optionally restricted to the
// top_k classes by ground-truth count (top_k <= 0 means all). Throws
// ConfigError when no class has a defined AP.
double mean_ap(const std::vector<ClassEval>& per_class, int top_k = 0);

struct EvalReport {
    std::vector<ClassEval> per_class; // sorted by class label
    double map = 0.0;
    double iou_threshold = 0.5;
    int top_k = 0;
};

EvalReport evaluate_detections(const std::vector<DetectionRecord>& detections,
                               const std::vector<GroundTruthRecord>& ground_truth,
                               double iou_threshold = 0.5, int top_k = 0);

// JSON file formats: detections are an array of
//   {"image_id", "class", "box": [x_min, y_min, x_max, y_max], "score"},
// ground truth the same without "score". Violations name the offending row.
std::vector<DetectionRecord> load_detections(const std::filesystem::path& path);
std::vector<GroundTruthRecord> load_ground_truth(const std::filesystem::path& path);
void save_ground_truth(const std::vector<GroundTruthRecord>& records,
                       const std::filesystem::path& path);

void write_report(const EvalReport& report, const std::filesystem::path& path);
void write_pr_csv(const EvalReport& report, const std::filesystem::path& path);

// Per-class instance counts (the dataset-imbalance summary).
struct ClassCount {
    std::string class_label;
    int ground_truth = 0;
    int detections = 0;
};

std::vector<ClassCount> class_summary(const std::vector<GroundTruthRecord>& ground_truth,
                                      const std::vector<DetectionRecord>& detections);
void write_class_summary(const std::vector<ClassCount>& counts, const std::filesystem::path& path);

} // namespace understory::det
