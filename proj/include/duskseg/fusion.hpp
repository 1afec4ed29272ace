#pragma once

#include "duskseg/bilateral.hpp"
#include "duskseg/class_set.hpp"
#include "duskseg/raster.hpp"
#include "duskseg/soft_tensor.hpp"

namespace duskseg {

struct FusionParams {
    double alpha_l = 0.3;  // weight when predictions disagree on dynamic content
    double alpha_h = 0.6;  // weight otherwise
    double eta = 0.2;      // agreement threshold on the opposing probability

    void check() const;  // 0 < alpha_l <= alpha_h <= 1, 0 < eta < 1
};

/// Per-pixel guidance weight, two-valued: alpha_l where one prediction's
/// argmax is a dynamic class and the other prediction gives that class
/// probability <= eta, alpha_h otherwise.
struct AlphaMap {
    Plane<float> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
};

AlphaMap alpha_map(const SoftPredictionTensor& aligned_day, const SoftPredictionTensor& dark,
                   const ClassSet& classes, const FusionParams& params);

struct FusionWeights {
    double dark = 0.0;  // Fz / (Fz + alpha*F1)
    double day = 0.0;   // exact complement, so the pair sums to 1
};

/// Per-pixel fusion weights from the two confidences and the guidance
/// weight alpha. Denominator >= Fz >= 1/C > 0.
FusionWeights fusion_weights(double f_dark, double f_day, double alpha);

/// Confidence-weighted convex combination per pixel:
///   out = wz * dark + w1 * aligned_day,
///   wz = Fz / (Fz + alpha*F1), w1 = 1 - wz,
/// with Fz, F1 the confidence maps of the two inputs. Output channels stay
/// within the input bounds and sum to 1.
SoftPredictionTensor fuse(const SoftPredictionTensor& dark, const SoftPredictionTensor& aligned_day,
                          const AlphaMap& alpha);

struct RefinedPrediction {
    SoftPredictionTensor soft;
    SemanticLabelMap hard;  // argmax of soft, ties toward lowest index
};

/// Full guidance pipeline: CIELAB of the dark frame, cross bilateral
/// alignment of the day prediction, confidence-adaptive fusion, argmax.
RefinedPrediction refine_guided(const SoftPredictionTensor& dark_soft, const RgbImage& dark_img,
                                const SoftPredictionTensor& day_soft, const ClassSet& classes,
                                const BilateralParams& bilateral, const FusionParams& fusion);

} // namespace duskseg
