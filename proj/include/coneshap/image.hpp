#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "coneshap/errors.hpp"

namespace coneshap {

// 8-bit RGB image, row-major.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> rgb; // height * width * 3

    static Image filled(int h, int w, std::array<std::uint8_t, 3> color = {0, 0, 0}) {
        Image img;
        img.height = h;
        img.width = w;
        img.rgb.resize(static_cast<std::size_t>(h) * w * 3);
        for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
            img.rgb[p * 3 + 0] = color[0];
            img.rgb[p * 3 + 1] = color[1];
            img.rgb[p * 3 + 2] = color[2];
        }
        return img;
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }

    std::uint8_t at(int y, int x, int c) const {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    void set(int y, int x, std::array<std::uint8_t, 3> color) {
        const std::size_t base = (static_cast<std::size_t>(y) * width + x) * 3;
        rgb[base + 0] = color[0];
        rgb[base + 1] = color[1];
        rgb[base + 2] = color[2];
    }

    bool operator==(const Image& other) const = default;
};

// Float RGB plane in the 0..255 scale. Bicubic resampling lands here so the
// model path stays exactly linear in the source bytes (no rounding, no
// clamping of overshoot).
struct ImageF {
    int height = 0;
    int width = 0;
    std::vector<double> rgb;

    double at(int y, int x, int c) const {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
};

inline void validate_image(const Image& img, const std::string& what = "image") {
    if (img.height < 8 || img.width < 8)
        throw DomainError(what + " must be at least 8x8, got " + std::to_string(img.width) + "x" +
                          std::to_string(img.height));
    if (img.rgb.size() != img.pixel_count() * 3)
        throw DomainError(what + " buffer size does not match dimensions");
}

inline std::array<std::uint8_t, 3> mean_color(const Image& img) {
    double sum[3] = {0.0, 0.0, 0.0};
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c) sum[c] += img.rgb[p * 3 + c];
    const double n = static_cast<double>(img.pixel_count());
    return {static_cast<std::uint8_t>(std::lround(sum[0] / n)),
            static_cast<std::uint8_t>(std::lround(sum[1] / n)),
            static_cast<std::uint8_t>(std::lround(sum[2] / n))};
}

inline ImageF to_imagef(const Image& img) {
    ImageF out;
    out.height = img.height;
    out.width = img.width;
    out.rgb.assign(img.rgb.begin(), img.rgb.end());
    return out;
}

namespace detail {

// Catmull-Rom bicubic kernel (a = -0.5).
inline double cubic_weight(double x) {
    x = std::abs(x);
    if (x <= 1.0) return 1.5 * x * x * x - 2.5 * x * x + 1.0;
    if (x < 2.0) return -0.5 * x * x * x + 2.5 * x * x - 4.0 * x + 2.0;
    return 0.0;
}

inline int clamp_index(int v, int upper) { return v < 0 ? 0 : (v >= upper ? upper - 1 : v); }

} // namespace detail

// Separable bicubic resampling, border-replicated, linear in the source
// pixel values. Overshoot is intentionally not clamped.
inline ImageF resize_bicubic(const Image& src, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw PreconditionError("resize target must be positive");
    ImageF out;
    out.height = out_h;
    out.width = out_w;
    out.rgb.assign(static_cast<std::size_t>(out_h) * out_w * 3, 0.0);

    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;

    // Horizontal pass into an intermediate src.height x out_w plane.
    std::vector<double> mid(static_cast<std::size_t>(src.height) * out_w * 3, 0.0);
    for (int ox = 0; ox < out_w; ++ox) {
        const double fx = (ox + 0.5) * sx - 0.5;
        const int x0 = static_cast<int>(std::floor(fx)) - 1;
        double wx[4];
        for (int t = 0; t < 4; ++t) wx[t] = detail::cubic_weight(fx - (x0 + t));
        for (int y = 0; y < src.height; ++y) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int t = 0; t < 4; ++t) {
                const int x = detail::clamp_index(x0 + t, src.width);
                for (int c = 0; c < 3; ++c) acc[c] += wx[t] * src.at(y, x, c);
            }
            const std::size_t base = (static_cast<std::size_t>(y) * out_w + ox) * 3;
            for (int c = 0; c < 3; ++c) mid[base + c] = acc[c];
        }
    }
    // Vertical pass.
    for (int oy = 0; oy < out_h; ++oy) {
        const double fy = (oy + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy)) - 1;
        double wy[4];
        for (int t = 0; t < 4; ++t) wy[t] = detail::cubic_weight(fy - (y0 + t));
        for (int ox = 0; ox < out_w; ++ox) {
            double acc[3] = {0.0, 0.0, 0.0};
            for (int t = 0; t < 4; ++t) {
                const int y = detail::clamp_index(y0 + t, src.height);
                const std::size_t base = (static_cast<std::size_t>(y) * out_w + ox) * 3;
                for (int c = 0; c < 3; ++c) acc[c] += wy[t] * mid[base + c];
            }
            const std::size_t obase = (static_cast<std::size_t>(oy) * out_w + ox) * 3;
            for (int c = 0; c < 3; ++c) out.rgb[obase + c] = acc[c];
        }
    }
    return out;
}

// sRGB (D65) to CIELAB.
inline std::array<double, 3> rgb_to_lab(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    auto linearize = [](double c) {
        c /= 255.0;
        return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    };
    const double r = linearize(r8), g = linearize(g8), b = linearize(b8);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    auto f = [](double t) {
        constexpr double delta = 6.0 / 29.0;
        return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
    };
    const double fx = f(x / 0.95047), fy = f(y / 1.0), fz = f(z / 1.08883);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

} // namespace coneshap
