#include "duskseg/soft_tensor_io.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "duskseg/errors.hpp"

namespace duskseg {

static_assert(std::endian::native == std::endian::little,
              "soft tensor I/O assumes a little-endian host");

namespace {

constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 2;  // magic, version, h, w, c

template <typename T>
void put(std::string& buf, T v) {
    char tmp[sizeof(T)];
    std::memcpy(tmp, &v, sizeof(T));
    buf.append(tmp, sizeof(T));
}

template <typename T>
T take(const char*& p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

} // namespace

SoftPredictionTensor read_soft_tensor(const std::filesystem::path& path, bool normalize) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open soft tensor: " + path.string());

    char header[kHeaderSize];
    if (!in.read(header, kHeaderSize))
        throw validation_error(path.string() + ": truncated header");
    const char* p = header;
    if (std::memcmp(p, kSoftTensorMagic, 4) != 0)
        throw validation_error(path.string() + ": bad magic; not a soft tensor file");
    p += 4;
    const std::uint16_t version = take<std::uint16_t>(p);
    if (version != kSoftTensorVersion)
        throw validation_error(path.string() + ": unsupported version " + std::to_string(version));
    const std::uint32_t h = take<std::uint32_t>(p);
    const std::uint32_t w = take<std::uint32_t>(p);
    const std::uint16_t c = take<std::uint16_t>(p);
    if (w == 0 || h == 0 || c < 2)
        throw validation_error(path.string() + ": bad dimensions in header");

    const std::size_t count = static_cast<std::size_t>(w) * h * c;
    std::vector<float> planar(count);
    if (!in.read(reinterpret_cast<char*>(planar.data()), count * sizeof(float)))
        throw validation_error(path.string() + ": truncated payload");
    char extra;
    if (in.read(&extra, 1))
        throw validation_error(path.string() + ": trailing bytes after payload");

    // Planar channel-major on disk -> interleaved in memory. Blocked so
    // the strided writes stay cache-resident at camera resolutions.
    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    constexpr std::size_t kBlock = 8192;
    std::vector<float> data(count);
    for (std::size_t b0 = 0; b0 < pixels; b0 += kBlock) {
        const std::size_t b1 = std::min(pixels, b0 + kBlock);
        for (std::uint16_t ch = 0; ch < c; ++ch) {
            const float* src = planar.data() + static_cast<std::size_t>(ch) * pixels;
            for (std::size_t i = b0; i < b1; ++i) data[i * c + ch] = src[i];
        }
    }

    // Validation and renormalization in one parallel pass.
    std::exception_ptr error;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < pixels; ++i) {
        float* p = data.data() + i * c;
        double sum = 0.0;
        bool bad = false;
        for (std::uint16_t ch = 0; ch < c; ++ch) {
            const float v = p[ch];
            if (!(v >= 0.f) || !std::isfinite(v)) bad = true;
            sum += v;
        }
        if (bad || std::abs(sum - 1.0) > SoftPredictionTensor::kSumTolerance) {
#pragma omp critical
            if (!error)
                error = std::make_exception_ptr(validation_error(
                    path.string() + ": invalid distribution at pixel " + std::to_string(i)));
            continue;
        }
        if (normalize) {
            const float inv = static_cast<float>(1.0 / sum);
            for (std::uint16_t ch = 0; ch < c; ++ch) p[ch] *= inv;
        }
    }
    if (error) std::rethrow_exception(error);

    return SoftPredictionTensor::wrap_unchecked(static_cast<int>(w), static_cast<int>(h),
                                                static_cast<int>(c), std::move(data));
}

void write_soft_tensor(const std::filesystem::path& path, const SoftPredictionTensor& tensor) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path.string());

    std::string header;
    header.append(kSoftTensorMagic, 4);
    put<std::uint16_t>(header, kSoftTensorVersion);
    put<std::uint32_t>(header, static_cast<std::uint32_t>(tensor.height()));
    put<std::uint32_t>(header, static_cast<std::uint32_t>(tensor.width()));
    put<std::uint16_t>(header, static_cast<std::uint16_t>(tensor.channels()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    const std::size_t pixels = tensor.pixel_count();
    const int c = tensor.channels();
    constexpr std::size_t kBlock = 8192;
    std::vector<float> planar(pixels * c);
    const float* src = tensor.raw().data();
    for (std::size_t b0 = 0; b0 < pixels; b0 += kBlock) {
        const std::size_t b1 = std::min(pixels, b0 + kBlock);
        for (int ch = 0; ch < c; ++ch) {
            float* dst = planar.data() + static_cast<std::size_t>(ch) * pixels;
            for (std::size_t i = b0; i < b1; ++i) dst[i] = src[i * c + ch];
        }
    }
    out.write(reinterpret_cast<const char*>(planar.data()),
              static_cast<std::streamsize>(planar.size() * sizeof(float)));
    if (!out)
        throw io_error("write failed: " + path.string());
}

} // namespace duskseg
