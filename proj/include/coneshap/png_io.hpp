#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "coneshap/errors.hpp"
#include "coneshap/image.hpp"

namespace coneshap {

// PNG and PPM file IO. RGB images read as 8-bit RGB regardless of the
// on-disk layout; label maps are stored as single-channel 16-bit PNG.

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
    // Hand control back via the setjmp buffer libpng keeps for us.
    (void)msg;
    png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

} // namespace detail

inline void write_png_rgb8(const std::string& path, const Image& img) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              detail::png_error_fn, detail::png_warning_fn);
    if (png == nullptr) throw FormatError("libpng init failure");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
                 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

inline Image read_png_rgb8(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open: " + path);
    unsigned char header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw FormatError("not a PNG file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             detail::png_error_fn, detail::png_warning_fn);
    if (png == nullptr) throw FormatError("libpng init failure");
    png_infop info = png_create_info_struct(png);
    Image img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    png_set_expand(png);              // palette/gray/low-depth -> full
    png_set_strip_16(png);            // 16 -> 8
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.width = static_cast<int>(png_get_image_width(png, info));
    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG layout: " + path);
    }
    img.rgb.resize(img.pixel_count() * 3);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] = img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

// Single-channel 16-bit PNG used for label maps (one segment id per pixel).
inline void write_png_gray16(const std::string& path, int height, int width,
                             const std::vector<std::uint16_t>& values) {
    if (values.size() != static_cast<std::size_t>(height) * width)
        throw PreconditionError("gray16 buffer does not match dimensions");
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError("cannot open for writing: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              detail::png_error_fn, detail::png_warning_fn);
    if (png == nullptr) throw FormatError("libpng init failure");
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError("PNG write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    // PNG stores 16-bit samples big-endian; build rows explicitly.
    std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::uint16_t v = values[static_cast<std::size_t>(y) * width + x];
            row[static_cast<std::size_t>(x) * 2] = static_cast<std::uint8_t>(v >> 8);
            row[static_cast<std::size_t>(x) * 2 + 1] = static_cast<std::uint8_t>(v & 0xff);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct Gray16 {
    int height = 0;
    int width = 0;
    std::vector<std::uint16_t> values;
};

inline Gray16 read_png_gray16(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open: " + path);
    unsigned char header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0)
        throw FormatError("not a PNG file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             detail::png_error_fn, detail::png_warning_fn);
    if (png == nullptr) throw FormatError("libpng init failure");
    png_infop info = png_create_info_struct(png);
    Gray16 out;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("corrupt PNG: " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
        png_get_bit_depth(png, info) != 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("expected 16-bit grayscale PNG: " + path);
    }
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.values.resize(static_cast<std::size_t>(out.height) * out.width);
    std::vector<std::uint8_t> row(static_cast<std::size_t>(out.width) * 2);
    for (int y = 0; y < out.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < out.width; ++x) {
            out.values[static_cast<std::size_t>(y) * out.width + x] = static_cast<std::uint16_t>(
                (static_cast<std::uint16_t>(row[static_cast<std::size_t>(x) * 2]) << 8) |
                row[static_cast<std::size_t>(x) * 2 + 1]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

// Binary PPM (P6, maxval 255).
inline void write_ppm(const std::string& path, const Image& img) {
    detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw FormatError("cannot open for writing: " + path);
    std::fprintf(fp.get(), "P6\n%d %d\n255\n", img.width, img.height);
    if (std::fwrite(img.rgb.data(), 1, img.rgb.size(), fp.get()) != img.rgb.size())
        throw FormatError("short write: " + path);
}

inline Image read_ppm(const std::string& path) {
    detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw FormatError("cannot open: " + path);
    char magic[3] = {0, 0, 0};
    if (std::fscanf(fp.get(), "%2s", magic) != 1 || std::strcmp(magic, "P6") != 0)
        throw FormatError("not a P6 PPM: " + path);
    auto next_int = [&]() {
        int value = 0;
        int ch = std::fgetc(fp.get());
        // skip whitespace and comments
        for (;;) {
            if (ch == '#') {
                while (ch != '\n' && ch != EOF) ch = std::fgetc(fp.get());
            } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
                ch = std::fgetc(fp.get());
            } else {
                break;
            }
        }
        if (ch < '0' || ch > '9') throw FormatError("bad PPM header");
        while (ch >= '0' && ch <= '9') {
            value = value * 10 + (ch - '0');
            ch = std::fgetc(fp.get());
        }
        return value;
    };
    Image img;
    img.width = next_int();
    img.height = next_int();
    const int maxval = next_int();
    if (maxval != 255) throw FormatError("PPM maxval must be 255: " + path);
    img.rgb.resize(img.pixel_count() * 3);
    if (std::fread(img.rgb.data(), 1, img.rgb.size(), fp.get()) != img.rgb.size())
        throw FormatError("truncated PPM: " + path);
    return img;
}

// Dispatch by extension; ".ppm" -> PPM, anything else is treated as PNG.
inline Image load_image(const std::string& path) {
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".ppm") return read_ppm(path);
    return read_png_rgb8(path);
}

} // namespace coneshap
