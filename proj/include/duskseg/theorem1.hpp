#pragma once

#include <optional>
#include <vector>

#include "duskseg/curve.hpp"

namespace duskseg {

/// Checks, on a concrete dataset, the confidence-separation guarantee:
/// if every invalid-region prediction is less confident than every
/// valid-region one, invalidating below the gap strictly improves UIoU
/// over IoU for every class that had an invalid-region error.
struct Theorem1Report {
    bool has_invalid_pixels = false;        // some labeled pixel with J=1
    double theta1 = 0.0;                    // max confidence over labeled J=1 pixels
    double theta2 = 0.0;                    // min confidence over labeled J=0 pixels (+inf if none)
    bool separation_holds = false;          // has_invalid_pixels && theta1 < theta2

    /// Threshold actually evaluated: smallest float above theta1, the
    /// infimum of thresholds that invalidate every J=1 pixel. Always
    /// <= theta2 when separation holds, so no J=0 pixel is invalidated.
    double theta_eval = 0.0;

    struct PerClass {
        bool witness = false;               // exists p in FN(1/C) u FP(1/C) with J(p)=1
        std::optional<double> iou;          // UIoU at 1/C
        std::optional<double> uiou_at_eval;
        bool inequality_checked = false;    // separation && witness && both defined
        bool inequality_verified = false;   // iou < uiou_at_eval
    };
    std::vector<PerClass> per_class;

    bool assumptions_hold() const { return separation_holds; }
};

/// Requires soft predictions on every sample.
Theorem1Report verify_theorem1(const SampleSource& source, const ClassSet& classes);

} // namespace duskseg
