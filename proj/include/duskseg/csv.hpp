#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "duskseg/class_set.hpp"
#include "duskseg/curve.hpp"

namespace duskseg {

/// Fixed 6-significant-digit float formatting, locale-independent, used by
/// every CSV writer so goldens are byte-stable.
std::string format_sig(double v);

/// Columns: theta, one UIoU column per class (n/a when undefined),
/// mean_uiou, invalidated_pixels.
void write_curve_csv(std::ostream& out, const UIoUCurve& curve, const ClassSet& classes);
void write_curve_csv(const std::filesystem::path& path, const UIoUCurve& curve,
                     const ClassSet& classes);

} // namespace duskseg
