#pragma once

#include <cstdint>
#include <optional>

#include "duskseg/class_set.hpp"
#include "duskseg/raster.hpp"

namespace duskseg {

struct ConsistencyReport {
    /// Agreement over pixels labeled (non-ignore) in both annotations;
    /// nullopt when no pixel is jointly labeled.
    std::optional<double> semantic_agreement_pct;
    std::uint64_t jointly_labeled = 0;
    std::uint64_t semantic_agree = 0;

    /// Agreement over all pixels.
    double mask_agreement_pct = 0.0;
    std::uint64_t total_pixels = 0;
    std::uint64_t mask_agree = 0;

    ConsistencyReport& operator+=(const ConsistencyReport& o);
    void finalize();  // recomputes percentages from counts
};

/// Compares two annotations of the same image. Throws validation_error on
/// dimension mismatch.
ConsistencyReport annotation_consistency(const SemanticLabelMap& labels_a, const InvalidMask& mask_a,
                                         const SemanticLabelMap& labels_b, const InvalidMask& mask_b,
                                         const ClassSet& classes);

} // namespace duskseg
