#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "duskseg/class_set.hpp"
#include "duskseg/raster.hpp"

namespace duskseg {

struct ClassTally {
    std::uint64_t tp = 0;  // H = pred = c
    std::uint64_t fp = 0;  // H != c (labeled), pred = c
    std::uint64_t fn = 0;  // H = c, pred not in {c, invalid}
    std::uint64_t ti = 0;  // H = c, pred invalid, J = 1
    std::uint64_t fi = 0;  // H = c, pred invalid, J = 0

    ClassTally& operator+=(const ClassTally& o) {
        tp += o.tp; fp += o.fp; fn += o.fn; ti += o.ti; fi += o.fi;
        return *this;
    }
    bool operator==(const ClassTally&) const = default;
};

/// Per-class pixel counts at one confidence threshold. 64-bit so a full
/// dataset (hundreds of megapixels) cannot overflow. Merging is plain
/// integer addition: associative and order-independent.
struct ConfusionTallies {
    double theta = 0.0;
    std::vector<ClassTally> per_class;

    explicit ConfusionTallies(int num_classes = 0, double theta_value = 0.0)
        : theta(theta_value), per_class(num_classes) {}

    ConfusionTallies& operator+=(const ConfusionTallies& o);
    bool operator==(const ConfusionTallies&) const = default;
};

/// Tallies one image pair. Ground truth must not contain kInvalidLabel;
/// pixels with H = ignore contribute to no set. Parallel over rows with
/// per-thread tallies merged by addition (exact).
ConfusionTallies accumulate_confusion(const SemanticLabelMap& gt, const InvalidMask& mask,
                                      const SemanticLabelMap& pred, const ClassSet& classes);

/// (tp+ti) / (tp+ti+fp+fn+fi); nullopt when the denominator is zero
/// (class excluded from the mean).
std::optional<double> uiou_per_class(const ConfusionTallies& t, int c);

/// Arithmetic mean over classes with defined UIoU, in ascending class
/// order. Throws validation_error("empty evaluation") when every class is
/// undefined.
double mean_uiou(const ConfusionTallies& t);

} // namespace duskseg
