#include "duskseg/soft_tensor.hpp"

#include <cmath>
#include <string>

#include "duskseg/errors.hpp"

namespace duskseg {

SoftPredictionTensor::SoftPredictionTensor(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels < 2)
        throw validation_error("soft tensor needs positive dimensions and at least 2 channels");
    data_.assign(static_cast<std::size_t>(width) * height * channels, 0.f);
}

SoftPredictionTensor SoftPredictionTensor::wrap_unchecked(int width, int height, int channels,
                                                          std::vector<float> data) {
    SoftPredictionTensor t(width, height, channels);
    if (data.size() != t.data_.size())
        throw validation_error("soft tensor data size does not match dimensions");
    t.data_ = std::move(data);
    return t;
}

SoftPredictionTensor SoftPredictionTensor::from_raw(int width, int height, int channels,
                                                    std::vector<float> data) {
    SoftPredictionTensor t = wrap_unchecked(width, height, channels, std::move(data));
    t.validate();
    t.normalize();
    return t;
}

void SoftPredictionTensor::validate() const {
    const std::size_t n = pixel_count();
    const float* p = data_.data();
    for (std::size_t i = 0; i < n; ++i, p += channels_) {
        double sum = 0.0;
        for (int c = 0; c < channels_; ++c) {
            const float v = p[c];
            if (!(v >= 0.f) || !std::isfinite(v))
                throw validation_error("soft tensor value negative or non-finite at pixel " +
                                       std::to_string(i) + " channel " + std::to_string(c));
            sum += v;
        }
        if (std::abs(sum - 1.0) > kSumTolerance)
            throw validation_error("soft tensor channel sum " + std::to_string(sum) +
                                   " violates normalization at pixel " + std::to_string(i));
    }
}

void SoftPredictionTensor::normalize() {
    const std::size_t n = pixel_count();
    float* p = data_.data();
    for (std::size_t i = 0; i < n; ++i, p += channels_) {
        double sum = 0.0;
        for (int c = 0; c < channels_; ++c) sum += p[c];
        if (sum <= 0.0)
            throw validation_error("soft tensor pixel with zero channel sum");
        const float inv = static_cast<float>(1.0 / sum);
        for (int c = 0; c < channels_; ++c) p[c] *= inv;
    }
}

int SoftPredictionTensor::argmax(int x, int y) const {
    const float* p = pixel(x, y);
    int best = 0;
    for (int c = 1; c < channels_; ++c)
        if (p[c] > p[best]) best = c;
    return best;
}

float SoftPredictionTensor::max_prob(int x, int y) const {
    const float* p = pixel(x, y);
    float best = p[0];
    for (int c = 1; c < channels_; ++c)
        if (p[c] > best) best = p[c];
    return best;
}

ConfidenceMap confidence_map(const SoftPredictionTensor& soft) {
    ConfidenceMap out{Plane<float>(soft.width(), soft.height())};
    const int h = soft.height(), w = soft.width(), C = soft.channels();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* p = soft.pixel(0, y);
        float* o = out.px.row(y);
        for (int x = 0; x < w; ++x, p += C) {
            float best = p[0];
            for (int c = 1; c < C; ++c)
                if (p[c] > best) best = p[c];
            o[x] = best;
        }
    }
    return out;
}

SemanticLabelMap argmax_map(const SoftPredictionTensor& soft) {
    SemanticLabelMap out{Plane<std::uint8_t>(soft.width(), soft.height())};
    const int h = soft.height(), w = soft.width(), C = soft.channels();
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* p = soft.pixel(0, y);
        std::uint8_t* o = out.px.row(y);
        for (int x = 0; x < w; ++x, p += C) {
            int best = 0;
            for (int c = 1; c < C; ++c)
                if (p[c] > p[best]) best = c;
            o[x] = static_cast<std::uint8_t>(best);
        }
    }
    return out;
}

} // namespace duskseg
