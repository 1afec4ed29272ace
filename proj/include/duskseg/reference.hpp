#pragma once

#include <vector>

#include "duskseg/bilateral.hpp"
#include "duskseg/confusion.hpp"
#include "duskseg/curve.hpp"
#include "duskseg/fusion.hpp"
#include "duskseg/raster.hpp"
#include "duskseg/soft_tensor.hpp"

namespace duskseg::reference {

/// Serial, single-pass twins of the parallel kernels. Same arithmetic,
/// no OpenMP, no sweep shortcuts: the naive route the optimized kernels
/// are tested and benchmarked against.

LabImage rgb_to_cielab(const RgbImage& img);

ConfusionTallies accumulate_confusion(const SemanticLabelMap& gt, const InvalidMask& mask,
                                      const SemanticLabelMap& pred, const ClassSet& classes);

/// Thresholds and re-tallies the whole dataset at every grid point.
SweepResult sweep_confusion(const SampleSource& source, const ClassSet& classes,
                            const std::vector<double>& theta_grid);

/// Direct double-loop summation of the cross bilateral filter (exact
/// path only; downsample_factor is ignored).
SoftPredictionTensor cross_bilateral_align(const SoftPredictionTensor& day_soft,
                                           const LabImage& dark, const BilateralParams& params);

SoftPredictionTensor fuse(const SoftPredictionTensor& dark, const SoftPredictionTensor& aligned_day,
                          const AlphaMap& alpha);

} // namespace duskseg::reference
