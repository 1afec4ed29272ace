#pragma once

#include <cstdint>

#include "duskseg/raster.hpp"

namespace duskseg {

/// Scalar sRGB (8-bit, D65) -> CIELAB.
LabPixel srgb_to_lab(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Per-pixel sRGB -> XYZ(D65) -> CIELAB. Parallel over rows.
LabImage rgb_to_cielab(const RgbImage& img);

} // namespace duskseg
