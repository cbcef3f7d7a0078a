#pragma once

#include <vector>

#include "understory/image.hpp"

namespace understory::fusion {

// Laplacian pyramid. levels run finest -> coarsest; level k has dimensions
// ceil(w / 2^k) x ceil(h / 2^k). base is the final low-pass residual.
// reconstruct(decompose(I)) reproduces I within 1e-5 per pixel.
struct Pyramid {
    std::vector<ImagePlane> levels;
    ImagePlane base;
    int depth = 0;
};

// Binomial 5-tap blur [1,4,6,4,1]/16, mirror padding without edge
// duplication. Pinned so pyramids are bit-reproducible.
ImagePlane gaussian_blur5(const ImagePlane& img);

// Keeps even-indexed samples; output dims ceil(n/2).
ImagePlane downsample2(const ImagePlane& img);

// Zero-stuffed expansion convolved with the doubled blur kernel (DC gain 1).
ImagePlane upsample_to(const ImagePlane& img, int width, int height);

// Requires depth >= 1 and min(width, height) / 2^depth >= 4.
Pyramid pyramid_decompose(const ImagePlane& img, int depth);

ImagePlane pyramid_reconstruct(const Pyramid& pyramid);

} // namespace understory::fusion
