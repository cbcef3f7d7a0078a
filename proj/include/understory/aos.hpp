#pragma once

#include <cstdint>
#include <vector>

#include "understory/geometry.hpp"
#include "understory/image.hpp"

namespace understory::aos {

struct View {
    Intrinsics intrinsics;
    Pose pose;
    ImagePlane image;
};

// Discrete light-field sample: one image per camera position, one channel.
struct ViewSet {
    std::vector<View> views;

    void validate() const; // >= 1 view, shared channel, images match sensors
    Channel channel() const { return views.front().image.channel(); }
};

// Refocused synthetic-aperture image. Pixels never covered by any view are
// invalid: value 0, coverage 0, valid flag cleared.
struct IntegralImage {
    ImagePlane image;
    ImagePlane coverage; // per-pixel sum of weights, in [0, n_views]
    std::vector<std::uint8_t> valid;
    int n_views = 0;
};

enum class Weighting { uniform, mask };

// Per output pixel: I_F = sum_i W_i * I_i(pi_i(u,v)) / sum_i W_i, where pi_i
// is the plane-induced homography into view i and W_i is 1 inside the source
// frustum, 0 outside. Weighting::mask additionally multiplies W_i by a
// caller-supplied binary mask per view, given in the reference raster
// (values >= 0.5 count as 1). Accumulation runs per pixel over views in
// fixed order, so output is independent of the thread count.
IntegralImage integrate(const ViewSet& views, const WorldPlane& plane, const Intrinsics& ref_intr,
                        const Pose& ref_pose, Weighting weighting = Weighting::uniform,
                        const std::vector<ImagePlane>* masks = nullptr, int threads = 1);

// One integral image per focal plane, each identical to a direct
// integrate() call at that plane.
std::vector<IntegralImage> focal_sweep(const ViewSet& views, const std::vector<WorldPlane>& planes,
                                       const Intrinsics& ref_intr, const Pose& ref_pose,
                                       Weighting weighting = Weighting::uniform,
                                       const std::vector<ImagePlane>* masks = nullptr,
                                       int threads = 1);

// Target saliency: |mean(target) - mean(background)| / (std(background) + 1e-6).
// Pixels with integer coordinates inside the (disjoint, in-image) boxes count.
double visibility_score(const ImagePlane& img, const BBoxPx& target_region,
                        const BBoxPx& background_region);

} // namespace understory::aos
