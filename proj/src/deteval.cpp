#include "understory/deteval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "json_util.hpp"
#include "understory/errors.hpp"

namespace understory::det {

using detail::json;

double iou(const BBoxPx& a, const BBoxPx& b) {
    const double ix = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double iy = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

// Canonical evaluation order: score desc, then image_id, then input order.
bool eval_before(const DetectionRecord& a, int ia, const DetectionRecord& b, int ib) {
    if (a.score != b.score) return a.score > b.score;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return ia < ib;
}

void validate_box(const BBoxPx& box, const std::string& context) {
    if (!std::isfinite(box.x_min) || !std::isfinite(box.y_min) || !std::isfinite(box.x_max) ||
        !std::isfinite(box.y_max))
        throw ConfigError(context + ": non-finite box coordinate");
    if (!box.valid()) throw ConfigError(context + ": box must satisfy x_min < x_max and y_min < y_max");
}

} // namespace

std::vector<bool> match_detections(const std::vector<DetectionRecord>& detections,
                                   const std::vector<GroundTruthRecord>& ground_truth,
                                   double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        throw ConfigError("iou_threshold must lie in (0, 1]");

    std::vector<int> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return eval_before(detections[a], a, detections[b], b);
    });

    std::vector<bool> gt_used(ground_truth.size(), false);
    std::vector<bool> tp(detections.size(), false);
    for (const int di : order) {
        const DetectionRecord& det = detections[di];
        int best_gt = -1;
        double best_iou = 0.0;
        for (std::size_t gi = 0; gi < ground_truth.size(); ++gi) {
            const GroundTruthRecord& gt = ground_truth[gi];
            if (gt_used[gi] || gt.class_label != det.class_label || gt.image_id != det.image_id)
                continue;
            const double overlap = iou(det.box, gt.box);
            if (overlap >= iou_threshold && overlap > best_iou) {
                best_iou = overlap;
                best_gt = static_cast<int>(gi);
            }
        }
        if (best_gt >= 0) {
            gt_used[best_gt] = true;
            tp[di] = true;
        }
    }
    return tp;
}

PRCurve pr_curve(std::vector<LabeledDetection> detections, int n_gt) {
    if (n_gt < 0) throw ConfigError("pr_curve: n_gt must be >= 0");
    std::sort(detections.begin(), detections.end(), [](const LabeledDetection& a, const LabeledDetection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.input_index < b.input_index;
    });

    PRCurve curve;
    curve.n_gt = n_gt;
    int tp_cum = 0;
    int fp_cum = 0;
    for (const auto& det : detections) {
        det.tp ? ++tp_cum : ++fp_cum;
        PRPoint p;
        p.precision = static_cast<double>(tp_cum) / (tp_cum + fp_cum);
        p.recall = n_gt > 0 ? static_cast<double>(tp_cum) / n_gt : 0.0;
        curve.points.push_back(p);
    }
    return curve;
}

std::optional<double> average_precision(const PRCurve& curve) {
    if (curve.n_gt == 0) return std::nullopt;

    // Monotone precision envelope, integrated over recall increments.
    const auto& pts = curve.points;
    std::vector<double> envelope(pts.size());
    double best = 0.0;
    for (std::size_t i = pts.size(); i-- > 0;) {
        best = std::max(best, pts[i].precision);
        envelope[i] = best;
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ap += (pts[i].recall - prev_recall) * envelope[i];
        prev_recall = pts[i].recall;
    }
    return ap;
}

double mean_ap(const std::vector<ClassEval>& per_class, int top_k) {
    std::vector<const ClassEval*> pool;
    for (const auto& c : per_class) pool.push_back(&c);
    if (top_k > 0 && static_cast<int>(pool.size()) > top_k) {
        std::sort(pool.begin(), pool.end(), [](const ClassEval* a, const ClassEval* b) {
            if (a->n_gt != b->n_gt) return a->n_gt > b->n_gt;
            return a->class_label < b->class_label;
        });
        pool.resize(top_k);
    }
    double sum = 0.0;
    int defined = 0;
    for (const ClassEval* c : pool) {
        if (c->ap) {
            sum += *c->ap;
            ++defined;
        }
    }
    if (defined == 0) throw ConfigError("mean_ap: no class has a defined AP");
    return sum / defined;
}

EvalReport evaluate_detections(const std::vector<DetectionRecord>& detections,
                               const std::vector<GroundTruthRecord>& ground_truth,
                               double iou_threshold, int top_k) {
    const std::vector<bool> tp = match_detections(detections, ground_truth, iou_threshold);

    std::set<std::string> classes;
    for (const auto& d : detections) classes.insert(d.class_label);
    for (const auto& g : ground_truth) classes.insert(g.class_label);

    EvalReport report;
    report.iou_threshold = iou_threshold;
    report.top_k = top_k;
    for (const auto& cls : classes) {
        ClassEval ce;
        ce.class_label = cls;
        std::vector<LabeledDetection> labeled;
        for (std::size_t i = 0; i < detections.size(); ++i) {
            if (detections[i].class_label != cls) continue;
            labeled.push_back({detections[i].score, detections[i].image_id, static_cast<int>(i), tp[i]});
        }
        ce.n_detections = static_cast<int>(labeled.size());
        for (const auto& g : ground_truth)
            if (g.class_label == cls) ++ce.n_gt;
        ce.curve = pr_curve(std::move(labeled), ce.n_gt);
        ce.ap = average_precision(ce.curve);
        report.per_class.push_back(std::move(ce));
    }
    report.map = mean_ap(report.per_class, top_k);
    return report;
}

namespace {

BBoxPx box_from_json(const json& row, const std::string& context) {
    const auto arr = detail::require<std::vector<double>>(row, "box", context.c_str());
    if (arr.size() != 4) throw ConfigError(context + ": 'box' must hold [x_min, y_min, x_max, y_max]");
    BBoxPx box{arr[0], arr[1], arr[2], arr[3]};
    validate_box(box, context);
    return box;
}

json box_to_json(const BBoxPx& box) {
    return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

json rows_from_file(const std::filesystem::path& path, const char* what) {
    const json j = detail::load_json_file(path, what);
    if (!j.is_array()) throw ConfigError(std::string(what) + " '" + path.string() + "': expected a JSON array");
    return j;
}

} // namespace

std::vector<DetectionRecord> load_detections(const std::filesystem::path& path) {
    const json rows = rows_from_file(path, "detections file");
    std::vector<DetectionRecord> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string ctx = "detections row " + std::to_string(i);
        DetectionRecord rec;
        rec.image_id = detail::require<std::string>(rows[i], "image_id", ctx.c_str());
        rec.class_label = detail::require<std::string>(rows[i], "class", ctx.c_str());
        rec.box = box_from_json(rows[i], ctx);
        rec.score = detail::require<double>(rows[i], "score", ctx.c_str());
        if (!std::isfinite(rec.score) || rec.score < 0.0 || rec.score > 1.0)
            throw ConfigError(ctx + ": score " + std::to_string(rec.score) + " outside [0, 1]");
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<GroundTruthRecord> load_ground_truth(const std::filesystem::path& path) {
    const json rows = rows_from_file(path, "ground-truth file");
    std::vector<GroundTruthRecord> out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string ctx = "ground-truth row " + std::to_string(i);
        GroundTruthRecord rec;
        rec.image_id = detail::require<std::string>(rows[i], "image_id", ctx.c_str());
        rec.class_label = detail::require<std::string>(rows[i], "class", ctx.c_str());
        rec.box = box_from_json(rows[i], ctx);
        out.push_back(std::move(rec));
    }
    return out;
}

void save_ground_truth(const std::vector<GroundTruthRecord>& records,
                       const std::filesystem::path& path) {
    json rows = json::array();
    for (const auto& r : records)
        rows.push_back(json{{"image_id", r.image_id}, {"class", r.class_label}, {"box", box_to_json(r.box)}});
    detail::save_json_file(rows, path, "ground-truth file");
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    json classes = json::array();
    for (const auto& c : report.per_class) {
        json points = json::array();
        for (const auto& p : c.curve.points) points.push_back(json::array({p.recall, p.precision}));
        json entry{{"class", c.class_label},
                   {"n_gt", c.n_gt},
                   {"n_detections", c.n_detections},
                   {"pr_points", points}};
        if (c.ap)
            entry["ap"] = *c.ap;
        else
            entry["ap"] = nullptr; // zero GT with detections: AP undefined, excluded from mAP
        classes.push_back(std::move(entry));
    }
    detail::save_json_file(json{{"iou_threshold", report.iou_threshold},
                                {"top_k", report.top_k},
                                {"map", report.map},
                                {"classes", classes}},
                           path, "evaluation report");
}

void write_pr_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write PR csv '" + path.string() + "'");
    out << "class,recall,precision\n";
    for (const auto& c : report.per_class)
        for (const auto& p : c.curve.points)
            out << c.class_label << "," << p.recall << "," << p.precision << "\n";
    if (!out) throw IoError("short write for PR csv '" + path.string() + "'");
}

std::vector<ClassCount> class_summary(const std::vector<GroundTruthRecord>& ground_truth,
                                      const std::vector<DetectionRecord>& detections) {
    std::map<std::string, ClassCount> counts;
    for (const auto& g : ground_truth) {
        auto& c = counts[g.class_label];
        c.class_label = g.class_label;
        ++c.ground_truth;
    }
    for (const auto& d : detections) {
        auto& c = counts[d.class_label];
        c.class_label = d.class_label;
        ++c.detections;
    }
    std::vector<ClassCount> out;
    for (auto& [_, c] : counts) out.push_back(std::move(c));
    std::sort(out.begin(), out.end(), [](const ClassCount& a, const ClassCount& b) {
        if (a.ground_truth != b.ground_truth) return a.ground_truth > b.ground_truth;
        return a.class_label < b.class_label;
    });
    return out;
}

void write_class_summary(const std::vector<ClassCount>& counts, const std::filesystem::path& path) {
    json rows = json::array();
    for (const auto& c : counts)
        rows.push_back(json{{"class", c.class_label},
                            {"ground_truth", c.ground_truth},
                            {"detections", c.detections}});
    detail::save_json_file(rows, path, "class summary");
}

} // namespace understory::det
