#include "understory/aos.hpp"

#include <cmath>

#include "understory/errors.hpp"
#include "understory/parallel.hpp"

namespace understory::aos {

void ViewSet::validate() const {
    if (views.empty()) throw ConfigError("view set: needs at least one view");
    const Channel ch = views.front().image.channel();
    for (const auto& v : views) {
        v.intrinsics.validate();
        v.pose.validate();
        if (v.image.channel() != ch) throw ConfigError("view set: mixed channels");
        if (v.image.width() != v.intrinsics.width || v.image.height() != v.intrinsics.height)
            throw ConfigError("view set: image dimensions do not match intrinsics");
    }
}

IntegralImage integrate(const ViewSet& views, const WorldPlane& plane, const Intrinsics& ref_intr,
                        const Pose& ref_pose, Weighting weighting,
                        const std::vector<ImagePlane>* masks, int threads) {
    views.validate();
    plane.validate();
    ref_intr.validate();
    ref_pose.validate();
    const int n = static_cast<int>(views.views.size());
    if (weighting == Weighting::mask) {
        if (!masks || static_cast<int>(masks->size()) != n)
            throw ConfigError("integrate: mask weighting requires one mask per view");
        for (const auto& m : *masks)
            if (m.width() != ref_intr.width || m.height() != ref_intr.height)
                throw ConfigError("integrate: masks must match the reference raster");
    }

    // One homography per view; throws on degenerate plane placement.
    std::vector<Eigen::Matrix3d> homographies;
    homographies.reserve(n);
    for (const auto& v : views.views)
        homographies.push_back(plane_homography(v.intrinsics, v.pose, plane, ref_intr, ref_pose));

    const int w = ref_intr.width;
    const int h = ref_intr.height;
    IntegralImage out;
    out.n_views = n;
    out.image = ImagePlane(w, h, views.channel());
    out.coverage = ImagePlane(w, h, Channel::weight);
    out.valid.assign(static_cast<std::size_t>(w) * h, 0);

    parallel_for(0, h, threads, [&](int y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            double weight_sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (weighting == Weighting::mask && (*masks)[i].at(x, y) < 0.5f) continue;
                const Eigen::Vector3d q = homographies[i] * Eigen::Vector3d(x, y, 1.0);
                if (std::abs(q.z()) < 1e-12) continue;
                if (const auto s = sample_bilinear(views.views[i].image, q.x() / q.z(), q.y() / q.z())) {
                    acc += *s;
                    weight_sum += 1.0;
                }
            }
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            out.coverage.at(x, y) = static_cast<float>(weight_sum);
            if (weight_sum > 0.0) {
                out.image.at(x, y) = static_cast<float>(acc / weight_sum);
                out.valid[idx] = 1;
            }
        }
    });
    return out;
}

std::vector<IntegralImage> focal_sweep(const ViewSet& views, const std::vector<WorldPlane>& planes,
                                       const Intrinsics& ref_intr, const Pose& ref_pose,
                                       Weighting weighting, const std::vector<ImagePlane>* masks,
                                       int threads) {
    std::vector<IntegralImage> out;
    out.reserve(planes.size());
    for (const auto& plane : planes)
        out.push_back(integrate(views, plane, ref_intr, ref_pose, weighting, masks, threads));
    return out;
}

namespace {

struct RegionStats {
    double mean = 0.0;
    double stddev = 0.0;
    long count = 0;
};

RegionStats region_stats(const ImagePlane& img, const BBoxPx& region) {
    if (!region.valid()) throw ConfigError("visibility_score: invalid region box");
    if (region.x_min < 0.0 || region.y_min < 0.0 || region.x_max > img.width() - 1 ||
        region.y_max > img.height() - 1)
        throw ConfigError("visibility_score: region outside image");
    const int x_lo = static_cast<int>(std::ceil(region.x_min));
    const int x_hi = static_cast<int>(std::floor(region.x_max));
    const int y_lo = static_cast<int>(std::ceil(region.y_min));
    const int y_hi = static_cast<int>(std::floor(region.y_max));
    RegionStats stats;
    double sum = 0.0, sum2 = 0.0;
    for (int y = y_lo; y <= y_hi; ++y)
        for (int x = x_lo; x <= x_hi; ++x) {
            const double v = img.at(x, y);
            sum += v;
            sum2 += v * v;
            ++stats.count;
        }
    if (stats.count == 0) throw ConfigError("visibility_score: region covers no pixel centers");
    stats.mean = sum / stats.count;
    const double var = std::max(0.0, sum2 / stats.count - stats.mean * stats.mean);
    stats.stddev = std::sqrt(var);
    return stats;
}

bool disjoint(const BBoxPx& a, const BBoxPx& b) {
    return a.x_max < b.x_min || b.x_max < a.x_min || a.y_max < b.y_min || b.y_max < a.y_min;
}

} // namespace

double visibility_score(const ImagePlane& img, const BBoxPx& target_region,
                        const BBoxPx& background_region) {
    if (!disjoint(target_region, background_region))
        throw ConfigError("visibility_score: target and background regions overlap");
    const RegionStats target = region_stats(img, target_region);
    const RegionStats background = region_stats(img, background_region);
    return std::abs(target.mean - background.mean) / (background.stddev + 1e-6);
}

} // namespace understory::aos
