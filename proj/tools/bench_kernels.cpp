// Times the OpenMP kernels against their serial reference twins on
// synthetic data and checks that both routes agree.

#include <array>
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include <omp.h>

#include "duskseg/bilateral.hpp"
#include "duskseg/color.hpp"
#include "duskseg/confusion.hpp"
#include "duskseg/curve.hpp"
#include "duskseg/fusion.hpp"
#include "duskseg/reference.hpp"

using namespace duskseg;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const char* name, double serial_s, double parallel_s, bool equal) {
    std::printf("%-28s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   %s\n", name, serial_s,
                parallel_s, serial_s / parallel_s, equal ? "match" : "MISMATCH");
}

RgbImage random_rgb(int w, int h, std::mt19937& rng) {
    RgbImage img{Plane<Rgb8>(w, h)};
    std::uniform_int_distribution<int> d(0, 255);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.px.at(x, y) = Rgb8{static_cast<std::uint8_t>(d(rng)),
                                   static_cast<std::uint8_t>(d(rng)),
                                   static_cast<std::uint8_t>(d(rng))};
    return img;
}

SoftPredictionTensor random_soft(int w, int h, int c, std::mt19937& rng) {
    std::uniform_real_distribution<float> d(0.01f, 1.f);
    std::vector<float> data(static_cast<std::size_t>(w) * h * c);
    for (auto& v : data) v = d(rng);
    SoftPredictionTensor t = SoftPredictionTensor::wrap_unchecked(w, h, c, std::move(data));
    t.normalize();
    return t;
}

SemanticLabelMap random_labels(int w, int h, int c, std::mt19937& rng, bool with_invalid) {
    SemanticLabelMap m{Plane<std::uint8_t>(w, h)};
    std::uniform_int_distribution<int> d(0, c - 1);
    std::uniform_int_distribution<int> coin(0, 9);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int v = d(rng);
            if (with_invalid && coin(rng) == 0) v = kInvalidLabel;
            m.px.at(x, y) = static_cast<std::uint8_t>(v);
        }
    return m;
}

InvalidMask random_mask(int w, int h, std::mt19937& rng) {
    InvalidMask m{Plane<std::uint8_t>(w, h)};
    std::uniform_int_distribution<int> d(0, 4);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            m.px.at(x, y) = d(rng) == 0 ? 1 : 0;
    return m;
}

SoftPredictionTensor smooth_soft(int w, int h, int C, std::mt19937& rng) {
    std::uniform_real_distribution<double> phase(0.0, 6.28), freq(0.5, 1.5), amp(0.5, 1.0);
    std::vector<std::array<double, 6>> params(C);
    for (int c = 0; c < C; ++c)
        params[c] = {phase(rng), freq(rng), amp(rng), phase(rng), freq(rng), amp(rng)};
    std::vector<float> data(static_cast<std::size_t>(w) * h * C);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = 2.0 * x / w, v = 2.0 * y / h;
            std::vector<double> e(C);
            double maxe = -1e9;
            for (int c = 0; c < C; ++c) {
                const auto& p = params[c];
                e[c] = 3.0 * (p[2] * std::cos(p[1] * u * 3.14 + p[0]) +
                              p[5] * std::cos(p[4] * v * 3.14 + p[3]));
                maxe = std::max(maxe, e[c]);
            }
            double sum = 0.0;
            for (int c = 0; c < C; ++c) sum += std::exp(e[c] - maxe);
            for (int c = 0; c < C; ++c)
                data[(static_cast<std::size_t>(y) * w + x) * C + c] =
                    static_cast<float>(std::exp(e[c] - maxe) / sum);
        }
    return SoftPredictionTensor::wrap_unchecked(w, h, C, std::move(data));
}

LabImage smooth_lab(int w, int h, std::mt19937& rng) {
    std::uniform_real_distribution<double> phase(0.0, 6.28);
    const double p1 = phase(rng), p2 = phase(rng);
    LabImage img{Plane<LabPixel>(w, h)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double u = 3.14 * x / w, v = 3.14 * y / h;
            img.px.at(x, y) = LabPixel{static_cast<float>(50 + 30 * std::cos(u + p1)),
                                       static_cast<float>(20 * std::sin(v + p2)),
                                       static_cast<float>(15 * std::cos(u + v))};
        }
    return img;
}

} // namespace

int main() {
    std::printf("threads: %d\n\n", omp_get_max_threads());
    std::mt19937 rng(7);
    const ClassSet& classes = ClassSet::cityscapes19();
    const int C = classes.count();

    {
        const RgbImage img = random_rgb(1920, 1080, rng);
        auto t0 = Clock::now();
        const LabImage a = reference::rgb_to_cielab(img);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const LabImage b = rgb_to_cielab(img);
        const double tp = seconds_since(t0);
        report("rgb_to_cielab 1080p", ts, tp, a.px == b.px);
    }

    {
        const int w = 1920, h = 1080;
        const SemanticLabelMap gt = random_labels(w, h, C, rng, false);
        const SemanticLabelMap pred = random_labels(w, h, C, rng, true);
        const InvalidMask mask = random_mask(w, h, rng);
        auto t0 = Clock::now();
        const ConfusionTallies a = reference::accumulate_confusion(gt, mask, pred, classes);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const ConfusionTallies b = accumulate_confusion(gt, mask, pred, classes);
        const double tp = seconds_since(t0);
        report("accumulate_confusion 1080p", ts, tp, a.per_class == b.per_class);
    }

    {
        // Naive per-theta re-tally vs the single-pass sweep.
        const int w = 512, h = 512;
        std::vector<EvalSample> samples;
        for (int i = 0; i < 4; ++i) {
            EvalSample s;
            s.gt = random_labels(w, h, C, rng, false);
            s.mask = random_mask(w, h, rng);
            s.soft = random_soft(w, h, C, rng);
            samples.push_back(std::move(s));
        }
        VectorSampleSource source(std::move(samples));
        const std::vector<double> grid = make_theta_grid(101, C);
        auto t0 = Clock::now();
        const SweepResult a = reference::sweep_confusion(source, classes, grid);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const SweepResult b = sweep_confusion(source, classes, grid);
        const double tp = seconds_since(t0);
        bool equal = a.invalidated == b.invalidated;
        for (std::size_t k = 0; equal && k < grid.size(); ++k)
            equal = a.per_theta[k].per_class == b.per_theta[k].per_class;
        report("uiou sweep 4x512x512x101", ts, tp, equal);
    }

    {
        const int w = 96, h = 96;
        const SoftPredictionTensor soft = random_soft(w, h, C, rng);
        const RgbImage rgb = random_rgb(w, h, rng);
        const LabImage lab = rgb_to_cielab(rgb);
        BilateralParams params;
        params.sigma_s = 8.0;
        params.sigma_r = 10.0;
        auto t0 = Clock::now();
        const SoftPredictionTensor a = reference::cross_bilateral_align(soft, lab, params);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const SoftPredictionTensor b = cross_bilateral_align(soft, lab, params);
        const double tp = seconds_since(t0);
        float max_diff = 0.f;
        for (std::size_t i = 0; i < a.raw().size(); ++i)
            max_diff = std::max(max_diff, std::abs(a.raw()[i] - b.raw()[i]));
        report("bilateral exact 96x96 s=8", ts, tp, max_diff < 1e-5f);
    }

    {
        // exact full-resolution filter vs the downsampled fast path, on
        // smooth inputs (the regime the fast path is specified for)
        const int w = 192, h = 192;
        const SoftPredictionTensor soft = smooth_soft(w, h, C, rng);
        const LabImage lab = smooth_lab(w, h, rng);
        BilateralParams exact;
        exact.sigma_s = 16.0;
        BilateralParams fast = exact;
        fast.downsample_factor = 4;
        auto t0 = Clock::now();
        const SoftPredictionTensor a = cross_bilateral_align(soft, lab, exact);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const SoftPredictionTensor b = cross_bilateral_align(soft, lab, fast);
        const double tp = seconds_since(t0);
        int agree = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                agree += a.argmax(x, y) == b.argmax(x, y) ? 1 : 0;
        std::printf("%-28s exact  %8.3fs   fast     %8.3fs   speedup %5.2fx   argmax agreement %.1f%%\n",
                    "bilateral fast path 192^2", ts, tp, ts / tp,
                    100.0 * agree / (w * h));
    }

    {
        const int w = 1920, h = 1080;
        const SoftPredictionTensor dark = random_soft(w, h, C, rng);
        const SoftPredictionTensor day = random_soft(w, h, C, rng);
        const AlphaMap alpha = alpha_map(day, dark, classes, FusionParams{});
        auto t0 = Clock::now();
        const SoftPredictionTensor a = reference::fuse(dark, day, alpha);
        const double ts = seconds_since(t0);
        t0 = Clock::now();
        const SoftPredictionTensor b = fuse(dark, day, alpha);
        const double tp = seconds_since(t0);
        float max_diff = 0.f;
        for (std::size_t i = 0; i < a.raw().size(); ++i)
            max_diff = std::max(max_diff, std::abs(a.raw()[i] - b.raw()[i]));
        report("fuse 1080p", ts, tp, max_diff < 1e-6f);
    }

    return 0;
}
