#pragma once

#include "duskseg/raster.hpp"
#include "duskseg/soft_tensor.hpp"

namespace duskseg {

struct BilateralParams {
    double sigma_s = 80.0;                  // spatial std, pixels
    double sigma_r = 10.0;                  // range std, CIELAB units
    double truncation_radius_factor = 2.5;  // window half-width = ceil(factor * sigma_s)
    int downsample_factor = 1;              // > 1 enables the fast path

    void check() const;
    int radius() const;
};

/// Cross bilateral filter: averages the day soft prediction over a square
/// window, weighted by spatial distance and by CIELAB color distance in
/// the dark reference image. Windows are clipped at borders and weights
/// renormalized (no padding); the output is renormalized per pixel to a
/// probability distribution. downsample_factor > 1 filters a box-reduced
/// copy at sigma_s/factor and bilinearly upsamples the result. Per-pixel
/// independent; parallel runs are bit-identical to serial on both paths.
SoftPredictionTensor cross_bilateral_align(const SoftPredictionTensor& day_soft,
                                           const LabImage& dark, const BilateralParams& params);

/// Box-average reduction by an integer factor (partial blocks at the
/// right/bottom borders average the covered pixels).
SoftPredictionTensor box_downsample(const SoftPredictionTensor& t, int factor);
LabImage box_downsample(const LabImage& img, int factor);

/// Center-aligned bilinear upsample to the given dimensions, then per-pixel
/// renormalization.
SoftPredictionTensor bilinear_upsample(const SoftPredictionTensor& t, int width, int height);

} // namespace duskseg
