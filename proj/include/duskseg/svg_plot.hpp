#pragma once

#include <filesystem>

#include "duskseg/curve.hpp"

namespace duskseg {

/// Mean UIoU(theta) curve as a standalone SVG: x from 1/C to 1, y in
/// percent, maximum point marked and labeled with its value.
void write_curve_svg(const std::filesystem::path& path, const UIoUCurve& curve);

} // namespace duskseg
