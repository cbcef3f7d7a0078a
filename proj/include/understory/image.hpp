#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace understory {

enum class Channel : std::uint8_t { visible, thermal, fused, weight };

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

// Single-channel raster. Row-major, origin at the top-left pixel, +u right,
// +v down. Intensities are nominally in [0, 1]; every public operation keeps
// the data finite. Instances are treated as immutable once filled in, so
// concurrent reads are safe.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int width, int height, Channel channel, float fill = 0.0f);

    int width() const { return width_; }
    int height() const { return height_; }
    Channel channel() const { return channel_; }
    void set_channel(Channel c) { channel_ = c; }

    float at(int x, int y) const {
        assert(x >= 0 && x < width_ && y >= 0 && y < height_);
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }
    float& at(int x, int y) {
        assert(x >= 0 && x < width_ && y >= 0 && y < height_);
        return data_[static_cast<std::size_t>(y) * width_ + x];
    }

    const std::vector<float>& data() const { return data_; }
    std::vector<float>& data() { return data_; }
    std::size_t size() const { return data_.size(); }

    bool same_shape(const ImagePlane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    // Throws NumericError if any value is NaN or Inf.
    void check_finite(const std::string& context) const;

private:
    int width_ = 0;
    int height_ = 0;
    Channel channel_ = Channel::visible;
    std::vector<float> data_;
};

// Axis-aligned box in continuous pixel coordinates.
struct BBoxPx {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool valid() const { return x_min < x_max && y_min < y_max; }
    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

// Bilinear interpolation of the four enclosing pixels. Returns nullopt when
// (u, v) falls outside [0, width-1] x [0, height-1]; out-of-bounds is the
// W_i = 0 out-of-frustum signal, not an error.
std::optional<float> sample_bilinear(const ImagePlane& img, double u, double v);

} // namespace understory
