#include "understory/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "understory/errors.hpp"

namespace understory {

namespace {

std::string path_str(const std::filesystem::path& p) { return p.string(); }

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail_read(const std::filesystem::path& path, const std::string& why) {
    throw IoError("cannot read image '" + path_str(path) + "': " + why);
}

[[noreturn]] void fail_write(const std::filesystem::path& path, const std::string& why) {
    throw IoError("cannot write image '" + path_str(path) + "': " + why);
}

bool has_magic(const std::filesystem::path& path, const unsigned char* magic, std::size_t n,
               std::FILE* f) {
    unsigned char buf[8] = {0};
    if (std::fread(buf, 1, n, f) != n) fail_read(path, "unsupported or corrupt image");
    std::rewind(f);
    return std::memcmp(buf, magic, n) == 0;
}

ImagePlane read_png(const std::filesystem::path& path, std::FILE* f, Channel channel) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail_read(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail_read(path, "libpng init failed");
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> raster;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_read(path, "unsupported or corrupt image");
    }
    png_init_io(png, f);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_read(path, "unsupported color type (grayscale 8/16-bit only)");
    }
    if (depth != 8 && depth != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_read(path, "unsupported bit depth " + std::to_string(depth));
    }
    if (w < 1 || h < 1 || w > (1u << 20) || h > (1u << 20)) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail_read(path, "dimension overflow");
    }
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t stride = png_get_rowbytes(png, info);
    raster.resize(stride * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    ImagePlane img(static_cast<int>(w), static_cast<int>(h), channel);
    if (depth == 8) {
        for (png_uint_32 y = 0; y < h; ++y)
            for (png_uint_32 x = 0; x < w; ++x)
                img.at(static_cast<int>(x), static_cast<int>(y)) = raster[y * stride + x] / 255.0f;
    } else {
        for (png_uint_32 y = 0; y < h; ++y)
            for (png_uint_32 x = 0; x < w; ++x) {
                const unsigned char* p = &raster[y * stride + 2 * x];
                const unsigned code = (static_cast<unsigned>(p[0]) << 8) | p[1]; // network order
                img.at(static_cast<int>(x), static_cast<int>(y)) = code / 65535.0f;
            }
    }
    return img;
}

void write_png(const ImagePlane& img, const std::filesystem::path& path, std::FILE* f, int depth) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) fail_write(path, "libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail_write(path, "libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail_write(path, "libpng failure");
    }
    png_init_io(png, f);
    png_set_IHDR(png, info, img.width(), img.height(), depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const double maxval = depth == 8 ? 255.0 : 65535.0;
    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * (depth / 8));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double v = std::clamp(static_cast<double>(img.at(x, y)), 0.0, 1.0);
            const auto code = static_cast<unsigned>(std::lround(v * maxval));
            if (depth == 8) {
                row[x] = static_cast<unsigned char>(code);
            } else {
                row[2 * x] = static_cast<unsigned char>(code >> 8);
                row[2 * x + 1] = static_cast<unsigned char>(code & 0xff);
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ImagePlane read_pgm(const std::filesystem::path& path, std::FILE* f, Channel channel) {
    // P5 with optional '#' comments between tokens
    auto next_token = [&]() -> long {
        int c = std::fgetc(f);
        while (c != EOF) {
            if (c == '#') {
                while (c != EOF && c != '\n') c = std::fgetc(f);
            } else if (std::isspace(c)) {
                c = std::fgetc(f);
            } else {
                break;
            }
        }
        if (c == EOF) fail_read(path, "unsupported or corrupt image");
        long value = 0;
        bool any = false;
        while (c != EOF && std::isdigit(c)) {
            value = value * 10 + (c - '0');
            if (value > (1L << 30)) fail_read(path, "dimension overflow");
            any = true;
            c = std::fgetc(f);
        }
        if (!any) fail_read(path, "unsupported or corrupt image");
        return value;
    };

    char magic[3] = {0};
    if (std::fread(magic, 1, 2, f) != 2 || magic[0] != 'P' || magic[1] != '5')
        fail_read(path, "unsupported or corrupt image");
    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token(); // single whitespace after maxval already consumed
    if (w < 1 || h < 1 || w > (1L << 20) || h > (1L << 20)) fail_read(path, "dimension overflow");
    if (maxval != 255 && maxval != 65535)
        fail_read(path, "unsupported bit depth (maxval " + std::to_string(maxval) + ")");

    ImagePlane img(static_cast<int>(w), static_cast<int>(h), channel);
    const std::size_t bytes_per = maxval == 255 ? 1 : 2;
    std::vector<unsigned char> raster(static_cast<std::size_t>(w) * h * bytes_per);
    if (std::fread(raster.data(), 1, raster.size(), f) != raster.size())
        fail_read(path, "unsupported or corrupt image");
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * w + x) * bytes_per;
            unsigned code = raster[i];
            if (bytes_per == 2) code = (code << 8) | raster[i + 1]; // big-endian per Netpbm
            img.at(static_cast<int>(x), static_cast<int>(y)) =
                static_cast<float>(code) / static_cast<float>(maxval);
        }
    return img;
}

void write_pgm(const ImagePlane& img, const std::filesystem::path& path, std::FILE* f, int depth) {
    const unsigned maxval = depth == 8 ? 255 : 65535;
    std::ostringstream header;
    header << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
    const std::string hs = header.str();
    if (std::fwrite(hs.data(), 1, hs.size(), f) != hs.size()) fail_write(path, "short write");

    std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * (depth / 8));
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const double v = std::clamp(static_cast<double>(img.at(x, y)), 0.0, 1.0);
            const auto code = static_cast<unsigned>(std::lround(v * maxval));
            if (depth == 8) {
                row[x] = static_cast<unsigned char>(code);
            } else {
                row[2 * x] = static_cast<unsigned char>(code >> 8);
                row[2 * x + 1] = static_cast<unsigned char>(code & 0xff);
            }
        }
        if (std::fwrite(row.data(), 1, row.size(), f) != row.size()) fail_write(path, "short write");
    }
}

} // namespace

Channel channel_from_filename(const std::filesystem::path& path, Channel fallback) {
    const std::string stem = path.stem().string();
    auto ends_with = [&](const char* suffix) {
        const std::size_t n = std::strlen(suffix);
        return stem.size() >= n && stem.compare(stem.size() - n, n, suffix) == 0;
    };
    if (ends_with("_vis")) return Channel::visible;
    if (ends_with("_thm")) return Channel::thermal;
    if (ends_with("_fused")) return Channel::fused;
    if (ends_with("_weight") || ends_with("_coverage")) return Channel::weight;
    return fallback;
}

std::string channel_suffix(Channel c) {
    switch (c) {
        case Channel::visible: return "_vis";
        case Channel::thermal: return "_thm";
        case Channel::fused: return "_fused";
        case Channel::weight: return "_weight";
    }
    return "_vis";
}

ImagePlane read_image(const std::filesystem::path& path, Channel fallback) {
    FilePtr f(std::fopen(path_str(path).c_str(), "rb"));
    if (!f) fail_read(path, "no such file or unreadable");
    const Channel channel = channel_from_filename(path, fallback);

    static const unsigned char png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    unsigned char head[2] = {0, 0};
    const std::size_t got = std::fread(head, 1, 2, f.get());
    std::rewind(f.get());
    if (got != 2) fail_read(path, "unsupported or corrupt image");

    ImagePlane img;
    if (head[0] == 'P' && head[1] == '5') {
        img = read_pgm(path, f.get(), channel);
    } else if (has_magic(path, png_magic, 8, f.get())) {
        img = read_png(path, f.get(), channel);
    } else {
        fail_read(path, "unsupported or corrupt image");
    }
    img.check_finite("read_image(" + path_str(path) + ")");
    return img;
}

void write_image(const ImagePlane& img, const std::filesystem::path& path, BitDepth depth) {
    if (img.width() < 1 || img.height() < 1) fail_write(path, "empty image");
    img.check_finite("write_image(" + path_str(path) + ")");

    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    FilePtr f(std::fopen(path_str(path).c_str(), "wb"));
    if (!f) fail_write(path, "cannot open for writing");
    if (ext == ".png") {
        write_png(img, path, f.get(), static_cast<int>(depth));
    } else if (ext == ".pgm") {
        write_pgm(img, path, f.get(), static_cast<int>(depth));
    } else {
        fail_write(path, "unsupported extension '" + ext + "' (use .png or .pgm)");
    }
    if (std::fflush(f.get()) != 0) fail_write(path, "flush failed");
}

} // namespace understory
