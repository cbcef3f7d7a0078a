#pragma once

#include "understory/image.hpp"
#include "understory/pyramid.hpp"
#include "understory/sparse.hpp"

namespace understory::fusion {

// Canonical MST-SR settings; every knob is exposed for ablations.
struct FusionConfig {
    int depth = 3;
    int patch_size = 8;
    int stride = 2;
    int atoms_per_dim = 16;
    int max_atoms = 8;
    double omp_tol = 1e-3;
};

// Per-pixel max-absolute rule for detail layers. Exact ties take the first
// input; callers pass the visible layer first.
ImagePlane fuse_detail_max(const ImagePlane& level_v, const ImagePlane& level_t);

// Sparse-representation fusion of the low-pass bases. Sliding patches are
// mean-removed and OMP-coded against `dict`; the patch with the larger l1
// coefficient norm wins (ties within 1e-12 go to the visible source, with
// the fused mean averaging the two patch means). The winner's raw zero-mean
// patch carries the content; codes only arbitrate. Overlapping patches are
// averaged uniformly.
ImagePlane fuse_base_sr(const ImagePlane& base_v, const ImagePlane& base_t,
                        const AtomDictionary& dict, int patch_size, int stride, int max_atoms,
                        double omp_tol = 1e-3, int threads = 1);

// Full MST-SR fusion: pyramid decompose both inputs, max-absolute details,
// SR bases, reconstruct, clamp to [0, 1].
ImagePlane mst_sr_fuse(const ImagePlane& visible, const ImagePlane& thermal,
                       const FusionConfig& config = {}, int threads = 1);

} // namespace understory::fusion
