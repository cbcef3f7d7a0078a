#include "understory/pyramid.hpp"

#include <cmath>

#include "understory/errors.hpp"

namespace understory::fusion {

namespace {

constexpr double kKernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};

int reflect101(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * n - 2 - i;
    }
    return i;
}

int half_up(int n) { return (n + 1) / 2; }

} // namespace

ImagePlane gaussian_blur5(const ImagePlane& img) {
    const int w = img.width();
    const int h = img.height();
    ImagePlane tmp(w, h, img.channel());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) acc += kKernel[t + 2] * img.at(reflect101(x + t, w), y);
            tmp.at(x, y) = static_cast<float>(acc);
        }
    ImagePlane out(w, h, img.channel());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) acc += kKernel[t + 2] * tmp.at(x, reflect101(y + t, h));
            out.at(x, y) = static_cast<float>(acc);
        }
    return out;
}

ImagePlane downsample2(const ImagePlane& img) {
    ImagePlane out(half_up(img.width()), half_up(img.height()), img.channel());
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(2 * x, 2 * y);
    return out;
}

ImagePlane upsample_to(const ImagePlane& img, int width, int height) {
    if (half_up(width) != img.width() || half_up(height) != img.height())
        throw ConfigError("upsample_to: target dimensions do not halve to the source's");
    // horizontal pass into width x img.height
    ImagePlane tmp(width, img.height(), img.channel());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) {
                const int p = x + t;
                if (p % 2 != 0) continue;
                acc += kKernel[t + 2] * img.at(reflect101(p / 2, img.width()), y);
            }
            tmp.at(x, y) = static_cast<float>(2.0 * acc);
        }
    ImagePlane out(width, height, img.channel());
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int t = -2; t <= 2; ++t) {
                const int p = y + t;
                if (p % 2 != 0) continue;
                acc += kKernel[t + 2] * tmp.at(x, reflect101(p / 2, img.height()));
            }
            out.at(x, y) = static_cast<float>(2.0 * acc);
        }
    return out;
}

Pyramid pyramid_decompose(const ImagePlane& img, int depth) {
    if (depth < 1) throw ConfigError("pyramid_decompose: depth must be >= 1");
    const double min_dim = std::min(img.width(), img.height());
    if (min_dim / std::pow(2.0, depth) < 4.0)
        throw ConfigError("pyramid_decompose: depth " + std::to_string(depth) +
                          " too large for " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + " image");

    Pyramid pyr;
    pyr.depth = depth;
    ImagePlane current = img;
    for (int k = 0; k < depth; ++k) {
        ImagePlane next = downsample2(gaussian_blur5(current));
        const ImagePlane up = upsample_to(next, current.width(), current.height());
        ImagePlane level(current.width(), current.height(), img.channel());
        for (int y = 0; y < level.height(); ++y)
            for (int x = 0; x < level.width(); ++x) level.at(x, y) = current.at(x, y) - up.at(x, y);
        pyr.levels.push_back(std::move(level));
        current = std::move(next);
    }
    pyr.base = std::move(current);
    return pyr;
}

ImagePlane pyramid_reconstruct(const Pyramid& pyramid) {
    if (pyramid.depth < 1 || static_cast<int>(pyramid.levels.size()) != pyramid.depth)
        throw ConfigError("pyramid_reconstruct: level count does not match depth");
    const ImagePlane* finer = &pyramid.levels.back();
    if (half_up(finer->width()) != pyramid.base.width() ||
        half_up(finer->height()) != pyramid.base.height())
        throw ConfigError("pyramid_reconstruct: base dimensions inconsistent with coarsest level");
    for (int k = pyramid.depth - 1; k > 0; --k) {
        if (half_up(pyramid.levels[k - 1].width()) != pyramid.levels[k].width() ||
            half_up(pyramid.levels[k - 1].height()) != pyramid.levels[k].height())
            throw ConfigError("pyramid_reconstruct: level dimensions inconsistent");
    }

    ImagePlane current = pyramid.base;
    for (int k = pyramid.depth - 1; k >= 0; --k) {
        const ImagePlane& level = pyramid.levels[k];
        ImagePlane up = upsample_to(current, level.width(), level.height());
        for (int y = 0; y < up.height(); ++y)
            for (int x = 0; x < up.width(); ++x) up.at(x, y) += level.at(x, y);
        current = std::move(up);
    }
    current.set_channel(pyramid.levels.front().channel());
    return current;
}

} // namespace understory::fusion
