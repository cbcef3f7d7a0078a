#include "understory/image.hpp"

#include <cmath>

#include "understory/errors.hpp"

namespace understory {

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::visible: return "visible";
        case Channel::thermal: return "thermal";
        case Channel::fused: return "fused";
        case Channel::weight: return "weight";
    }
    return "visible";
}

Channel channel_from_name(const std::string& name) {
    if (name == "visible") return Channel::visible;
    if (name == "thermal") return Channel::thermal;
    if (name == "fused") return Channel::fused;
    if (name == "weight") return Channel::weight;
    throw ConfigError("unknown channel name: " + name);
}

ImagePlane::ImagePlane(int width, int height, Channel channel, float fill)
    : width_(width), height_(height), channel_(channel) {
    if (width < 1 || height < 1)
        throw ConfigError("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                          std::to_string(height));
    data_.assign(static_cast<std::size_t>(width) * height, fill);
}

void ImagePlane::check_finite(const std::string& context) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i]))
            throw NumericError(context + ": non-finite value at pixel index " + std::to_string(i));
    }
}

std::optional<float> sample_bilinear(const ImagePlane& img, double u, double v) {
    const int w = img.width();
    const int h = img.height();
    if (!(u >= 0.0 && u <= w - 1 && v >= 0.0 && v <= h - 1)) return std::nullopt;

    int x0 = static_cast<int>(u);
    int y0 = static_cast<int>(v);
    if (x0 > w - 2) x0 = w - 2; // u == w-1 lands on the last cell
    if (y0 > h - 2) y0 = h - 2;
    if (w == 1) x0 = 0;
    if (h == 1) y0 = 0;
    const int x1 = w == 1 ? 0 : x0 + 1;
    const int y1 = h == 1 ? 0 : y0 + 1;
    const double tx = u - x0;
    const double ty = v - y0;

    const double c00 = img.at(x0, y0);
    const double c10 = img.at(x1, y0);
    const double c01 = img.at(x0, y1);
    const double c11 = img.at(x1, y1);
    const double top = c00 + (c10 - c00) * tx;
    const double bot = c01 + (c11 - c01) * tx;
    return static_cast<float>(top + (bot - top) * ty);
}

} // namespace understory
