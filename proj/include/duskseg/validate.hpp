#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duskseg/class_set.hpp"
#include "duskseg/raster.hpp"

namespace duskseg {

struct IllegalPixel {
    int x = 0, y = 0;
    std::uint8_t value = 0;
    const char* plane = "";  // "labels" or "mask"
};

struct PairValidationReport {
    bool dimensions_match = true;
    int labels_width = 0, labels_height = 0;
    int mask_width = 0, mask_height = 0;

    /// First kMaxItemized offending pixels, plus the total count.
    static constexpr std::size_t kMaxItemized = 32;
    std::vector<IllegalPixel> illegal;
    std::uint64_t illegal_total = 0;

    std::uint64_t labeled_pixels = 0;
    std::uint64_t labeled_invalid_pixels = 0;
    /// Fraction of labeled (non-ignore) pixels with J=1; 0 when nothing is labeled.
    double invalid_fraction = 0.0;

    bool ok() const { return dimensions_match && illegal_total == 0; }
    std::string to_string(const ClassSet& classes) const;
};

/// Ground-truth-side validation: labels must hold class indices or the
/// ignore value (kInvalidLabel is illegal in ground truth), masks must be
/// binary after 255->1 normalization. Dimension mismatch short-circuits
/// the pixel scan.
PairValidationReport validate_pair(const SemanticLabelMap& labels, const InvalidMask& mask,
                                   const ClassSet& classes);

} // namespace duskseg
