#pragma once

#include <cstddef>
#include <vector>

#include "duskseg/raster.hpp"

namespace duskseg {

/// Per-pixel probability distribution over C classes, stored interleaved
/// (channel innermost): data[(y*W + x)*C + c]. Distributions are validated
/// on ingestion (non-negative, channel sums within kSumTolerance of 1) and
/// renormalized to sum to 1 within machine precision.
class SoftPredictionTensor {
public:
    static constexpr double kSumTolerance = 1e-3;

    SoftPredictionTensor() = default;
    SoftPredictionTensor(int width, int height, int channels);

    /// Validates and renormalizes. Throws validation_error on negative or
    /// non-finite values or channel sums off by more than kSumTolerance.
    static SoftPredictionTensor from_raw(int width, int height, int channels,
                                         std::vector<float> data);

    /// Wraps data without validation or renormalization. For storage-level
    /// round trips and synthetic test construction.
    static SoftPredictionTensor wrap_unchecked(int width, int height, int channels,
                                               std::vector<float> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    float* pixel(int x, int y) {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
    }
    const float* pixel(int x, int y) const {
        return data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_;
    }

    std::vector<float>& raw() { return data_; }
    const std::vector<float>& raw() const { return data_; }

    /// Throws validation_error if any value is negative/non-finite or a
    /// channel sum is off by more than kSumTolerance.
    void validate() const;

    /// Divides every pixel by its channel sum. Idempotent up to machine
    /// epsilon times C.
    void normalize();

    /// Argmax class at a pixel; ties break toward the lowest class index.
    int argmax(int x, int y) const;
    float max_prob(int x, int y) const;

    bool same_shape(const SoftPredictionTensor& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }

private:
    int width_ = 0, height_ = 0, channels_ = 0;
    std::vector<float> data_;
};

/// Per-pixel channel maximum of the soft prediction.
ConfidenceMap confidence_map(const SoftPredictionTensor& soft);

/// Per-pixel argmax of the soft prediction (ties toward lowest index).
SemanticLabelMap argmax_map(const SoftPredictionTensor& soft);

} // namespace duskseg
