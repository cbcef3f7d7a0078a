#pragma once

#include <filesystem>

#include "understory/image.hpp"

namespace understory {

enum class BitDepth : std::uint8_t { eight = 8, sixteen = 16 };

// Grayscale PNG (8/16-bit) and PGM (P5, maxval 255/65535) I/O. Intensities
// map linearly: code = round(v * maxval). The channel tag is carried by the
// filename convention *_vis / *_thm / *_fused / *_weight; files without a
// recognized suffix read back as `fallback`.
//
// A 16-bit write/read round trip reproduces every pixel within 1/65535.
ImagePlane read_image(const std::filesystem::path& path, Channel fallback = Channel::visible);
void write_image(const ImagePlane& img, const std::filesystem::path& path,
                 BitDepth depth = BitDepth::sixteen);

// Suffix convention helpers.
Channel channel_from_filename(const std::filesystem::path& path, Channel fallback);
std::string channel_suffix(Channel c);

} // namespace understory
