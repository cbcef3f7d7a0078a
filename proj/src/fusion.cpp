#include "understory/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "understory/errors.hpp"
#include "understory/parallel.hpp"

namespace understory::fusion {

ImagePlane fuse_detail_max(const ImagePlane& level_v, const ImagePlane& level_t) {
    if (!level_v.same_shape(level_t)) throw ConfigError("fuse_detail_max: dimension mismatch");
    ImagePlane out(level_v.width(), level_v.height(), Channel::fused);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const float v = level_v.at(x, y);
            const float t = level_t.at(x, y);
            out.at(x, y) = std::abs(t) > std::abs(v) ? t : v;
        }
    return out;
}

namespace {

std::vector<int> patch_positions(int extent, int patch, int stride) {
    std::vector<int> positions;
    for (int p = 0; p + patch <= extent; p += stride) positions.push_back(p);
    if (positions.empty() || positions.back() != extent - patch)
        positions.push_back(extent - patch); // keep the trailing edge covered
    return positions;
}

Eigen::VectorXd extract_patch(const ImagePlane& img, int px, int py, int patch) {
    Eigen::VectorXd v(patch * patch);
    for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x) v[y * patch + x] = img.at(px + x, py + y);
    return v;
}

} // namespace

ImagePlane fuse_base_sr(const ImagePlane& base_v, const ImagePlane& base_t,
                        const AtomDictionary& dict, int patch_size, int stride, int max_atoms,
                        double omp_tol, int threads) {
    if (!base_v.same_shape(base_t)) throw ConfigError("fuse_base_sr: dimension mismatch");
    if (patch_size < 1 || stride < 1 || stride > patch_size)
        throw ConfigError("fuse_base_sr: requires 1 <= stride <= patch_size");
    if (base_v.width() < patch_size || base_v.height() < patch_size)
        throw ConfigError("fuse_base_sr: base smaller than the patch size");
    if (dict.signal_dim() != patch_size * patch_size)
        throw ConfigError("fuse_base_sr: dictionary does not match the patch size");

    const std::vector<int> xs = patch_positions(base_v.width(), patch_size, stride);
    const std::vector<int> ys = patch_positions(base_v.height(), patch_size, stride);
    const int n_patches = static_cast<int>(xs.size() * ys.size());

    // Patch decisions are independent; overlap-add runs afterwards in fixed
    // order so the output never depends on the thread count.
    std::vector<Eigen::VectorXd> fused_patches(n_patches);
    parallel_for(0, n_patches, threads, [&](int pi) {
        const int px = xs[pi % xs.size()];
        const int py = ys[pi / xs.size()];
        Eigen::VectorXd pv = extract_patch(base_v, px, py, patch_size);
        Eigen::VectorXd pt = extract_patch(base_t, px, py, patch_size);
        const double mean_v = pv.mean();
        const double mean_t = pt.mean();
        pv.array() -= mean_v;
        pt.array() -= mean_t;

        const double act_v = omp(pv, dict, max_atoms, omp_tol).activity_l1();
        const double act_t = omp(pt, dict, max_atoms, omp_tol).activity_l1();

        if (std::abs(act_v - act_t) <= 1e-12) {
            fused_patches[pi] = pv.array() + 0.5 * (mean_v + mean_t);
        } else if (act_v > act_t) {
            fused_patches[pi] = pv.array() + mean_v;
        } else {
            fused_patches[pi] = pt.array() + mean_t;
        }
    });

    std::vector<double> acc(static_cast<std::size_t>(base_v.width()) * base_v.height(), 0.0);
    std::vector<double> hits(acc.size(), 0.0);
    for (int pi = 0; pi < n_patches; ++pi) {
        const int px = xs[pi % xs.size()];
        const int py = ys[pi / xs.size()];
        for (int y = 0; y < patch_size; ++y)
            for (int x = 0; x < patch_size; ++x) {
                const std::size_t i = static_cast<std::size_t>(py + y) * base_v.width() + px + x;
                acc[i] += fused_patches[pi][y * patch_size + x];
                hits[i] += 1.0;
            }
    }

    ImagePlane out(base_v.width(), base_v.height(), Channel::fused);
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * base_v.width() + x;
            out.at(x, y) = static_cast<float>(acc[i] / hits[i]);
        }
    return out;
}

ImagePlane mst_sr_fuse(const ImagePlane& visible, const ImagePlane& thermal,
                       const FusionConfig& config, int threads) {
    if (!visible.same_shape(thermal))
        throw ConfigError("mst_sr_fuse: inputs must be co-registered and equal size");

    const Pyramid pyr_v = pyramid_decompose(visible, config.depth);
    const Pyramid pyr_t = pyramid_decompose(thermal, config.depth);

    Pyramid fused;
    fused.depth = config.depth;
    for (int k = 0; k < config.depth; ++k)
        fused.levels.push_back(fuse_detail_max(pyr_v.levels[k], pyr_t.levels[k]));

    const AtomDictionary dict = dct_dictionary(config.patch_size, config.atoms_per_dim);
    fused.base = fuse_base_sr(pyr_v.base, pyr_t.base, dict, config.patch_size, config.stride,
                              config.max_atoms, config.omp_tol, threads);

    ImagePlane out = pyramid_reconstruct(fused);
    out.set_channel(Channel::fused);
    for (auto& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

} // namespace understory::fusion
