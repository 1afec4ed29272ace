#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "duskseg/confusion.hpp"
#include "duskseg/raster.hpp"
#include "duskseg/soft_tensor.hpp"

namespace duskseg {

/// One evaluation image: ground truth, invalid mask, and either a soft
/// prediction (thresholdable) or a fixed hard prediction.
struct EvalSample {
    SemanticLabelMap gt;
    InvalidMask mask;
    std::optional<SoftPredictionTensor> soft;
    std::optional<SemanticLabelMap> hard;

    bool is_soft() const { return soft.has_value(); }
    void check() const;  // exactly one prediction present, shapes agree
};

/// Lazy sample access so dataset-scale sweeps never hold more than one
/// image per worker in memory. load() must be safe to call concurrently
/// for distinct indices.
class SampleSource {
public:
    virtual ~SampleSource() = default;
    virtual int size() const = 0;
    virtual EvalSample load(int index) const = 0;
};

/// In-memory source for tests and small runs.
class VectorSampleSource final : public SampleSource {
public:
    explicit VectorSampleSource(std::vector<EvalSample> samples)
        : samples_(std::move(samples)) {}
    int size() const override { return static_cast<int>(samples_.size()); }
    EvalSample load(int index) const override { return samples_[index]; }

private:
    std::vector<EvalSample> samples_;
};

/// count uniform samples over [1/C, 1], first point exactly 1/C, last
/// exactly 1. count >= 1 (count == 1 gives the single point 1/C).
std::vector<double> make_theta_grid(int count, int num_classes);

/// Exact-mode grid: 1/C plus the smallest representable value above each
/// unique observed confidence (clamped to 1) — one representative per
/// constant piece of UIoU(theta).
std::vector<double> make_exact_theta_grid(const SampleSource& source, int num_classes);

struct CurvePoint {
    double theta = 0.0;
    std::vector<std::optional<double>> per_class;
    double mean_uiou = 0.0;
    std::uint64_t invalidated_pixels = 0;
};

struct UIoUCurve {
    std::vector<CurvePoint> points;
    /// Index of the maximum mean UIoU (lowest theta on ties).
    int argmax_index = 0;

    double theta_star() const { return points[argmax_index].theta; }
    double max_mean_uiou() const { return points[argmax_index].mean_uiou; }
};

struct SweepResult {
    std::vector<ConfusionTallies> per_theta;
    std::vector<std::uint64_t> invalidated;  // all raster pixels, labeled or not
};

/// Dataset-wide tallies at every grid theta in one pass per image: each
/// pixel's contribution flips from its argmax class to invalid at a single
/// grid index, accumulated via difference arrays and prefix-summed. Exact
/// integer counts, identical to thresholding per theta. Parallel over
/// images.
SweepResult sweep_confusion(const SampleSource& source, const ClassSet& classes,
                            const std::vector<double>& theta_grid);

UIoUCurve build_curve(const SweepResult& sweep);

/// sweep_confusion + build_curve.
UIoUCurve uiou_curve(const SampleSource& source, const ClassSet& classes,
                     const std::vector<double>& theta_grid);

} // namespace duskseg
