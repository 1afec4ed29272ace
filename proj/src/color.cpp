#include "duskseg/color.hpp"

#include <array>
#include <cmath>

namespace duskseg {
namespace {

// IEC 61966-2-1 sRGB decoding, tabulated per 8-bit code value.
const std::array<double, 256>& linear_lut() {
    static const std::array<double, 256> lut = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) {
            const double s = i / 255.0;
            t[i] = s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
        }
        return t;
    }();
    return lut;
}

inline double lab_f(double t) {
    constexpr double delta = 6.0 / 29.0;
    constexpr double delta3 = delta * delta * delta;
    return t > delta3 ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

inline LabPixel to_lab(double rl, double gl, double bl) {
    // sRGB D65 primaries; the matrix rows sum to the white point, so gray
    // axes map to a = b = 0 up to rounding.
    const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
    const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
    const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;
    const double fx = lab_f(x / 0.95047);
    const double fy = lab_f(y);
    const double fz = lab_f(z / 1.08883);
    return LabPixel{static_cast<float>(116.0 * fy - 16.0), static_cast<float>(500.0 * (fx - fy)),
                    static_cast<float>(200.0 * (fy - fz))};
}

} // namespace

LabPixel srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const auto& lut = linear_lut();
    return to_lab(lut[r], lut[g], lut[b]);
}

LabImage rgb_to_cielab(const RgbImage& img) {
    LabImage out{Plane<LabPixel>(img.width(), img.height())};
    const auto& lut = linear_lut();
    const int h = img.height(), w = img.width();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const Rgb8* in = img.px.row(y);
        LabPixel* o = out.px.row(y);
        for (int x = 0; x < w; ++x)
            o[x] = to_lab(lut[in[x].r], lut[in[x].g], lut[in[x].b]);
    }
    return out;
}

} // namespace duskseg
