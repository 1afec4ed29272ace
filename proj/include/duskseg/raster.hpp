#pragma once

#include <cstdint>
#include <vector>

#include "duskseg/errors.hpp"

namespace duskseg {

/// Raster value marking a pixel the model declares indiscernible.
/// Distinct from the (configurable) ignore value, which defaults to 255.
inline constexpr std::uint8_t kInvalidLabel = 254;

/// Row-major 2-D grid of pixels. Immutable use after construction is
/// thread-safe; all kernels treat planes as read-only inputs.
template <typename T>
class Plane {
public:
    Plane() = default;
    Plane(int width, int height, T fill = T{})
        : width_(width), height_(height),
          data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
        if (width <= 0 || height <= 0)
            throw validation_error("plane dimensions must be positive");
    }
    Plane(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width <= 0 || height <= 0)
            throw validation_error("plane dimensions must be positive");
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw validation_error("plane data size does not match dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

    T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }
    const T* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    bool same_shape(const Plane& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const Plane& other) const = default;

private:
    int width_ = 0, height_ = 0;
    std::vector<T> data_;
};

struct Rgb8 {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb8&) const = default;
};

struct LabPixel {
    float L = 0.f, a = 0.f, b = 0.f;
    bool operator==(const LabPixel&) const = default;
};

/// Per-pixel hard class labels: a class index, the ignore value, or
/// (in predictions only) kInvalidLabel. Ground truth never carries
/// kInvalidLabel.
struct SemanticLabelMap {
    Plane<std::uint8_t> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
    bool operator==(const SemanticLabelMap&) const = default;
};

/// Binary map J: 0 = valid, 1 = invalid. Raster value 255 is accepted on
/// read and normalized to 1.
struct InvalidMask {
    Plane<std::uint8_t> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
    bool operator==(const InvalidMask&) const = default;
};

struct RgbImage {
    Plane<Rgb8> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
};

/// CIELAB, D65 white point. L in [0,100]; a,b within +/-128 for any
/// 8-bit sRGB source.
struct LabImage {
    Plane<LabPixel> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
};

/// Per-pixel channel maximum of a soft prediction; values in [1/C, 1].
struct ConfidenceMap {
    Plane<float> px;

    int width() const { return px.width(); }
    int height() const { return px.height(); }
};

} // namespace duskseg
