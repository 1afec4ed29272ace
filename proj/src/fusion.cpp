#include "duskseg/fusion.hpp"

#include <algorithm>

#include "duskseg/color.hpp"
#include "duskseg/errors.hpp"

namespace duskseg {

void FusionParams::check() const {
    if (!(alpha_l > 0.0 && alpha_l <= alpha_h && alpha_h <= 1.0))
        throw validation_error("fusion weights must satisfy 0 < alpha_l <= alpha_h <= 1");
    if (!(eta > 0.0 && eta < 1.0))
        throw validation_error("fusion eta must lie in (0, 1)");
}

AlphaMap alpha_map(const SoftPredictionTensor& aligned_day, const SoftPredictionTensor& dark,
                   const ClassSet& classes, const FusionParams& params) {
    params.check();
    if (!aligned_day.same_shape(dark))
        throw validation_error("alpha map inputs have mismatched dimensions");
    if (aligned_day.channels() != classes.count())
        throw validation_error("soft prediction channel count differs from class set");

    const int w = dark.width(), h = dark.height(), C = dark.channels();
    const float al = static_cast<float>(params.alpha_l);
    const float ah = static_cast<float>(params.alpha_h);
    const float eta = static_cast<float>(params.eta);
    AlphaMap out{Plane<float>(w, h)};
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* day_row = aligned_day.pixel(0, y);
        const float* dark_row = dark.pixel(0, y);
        float* o = out.px.row(y);
        for (int x = 0; x < w; ++x) {
            const float* pd = day_row + static_cast<std::size_t>(x) * C;
            const float* pz = dark_row + static_cast<std::size_t>(x) * C;
            int c1 = 0, c2 = 0;
            for (int c = 1; c < C; ++c) {
                if (pd[c] > pd[c1]) c1 = c;
                if (pz[c] > pz[c2]) c2 = c;
            }
            const bool low = (classes.is_dynamic(c1) && pz[c1] <= eta) ||
                             (classes.is_dynamic(c2) && pd[c2] <= eta);
            o[x] = low ? al : ah;
        }
    }
    return out;
}

FusionWeights fusion_weights(double f_dark, double f_day, double alpha) {
    const double wz = f_dark / (f_dark + alpha * f_day);
    return FusionWeights{wz, 1.0 - wz};
}

SoftPredictionTensor fuse(const SoftPredictionTensor& dark, const SoftPredictionTensor& aligned_day,
                          const AlphaMap& alpha) {
    if (!dark.same_shape(aligned_day))
        throw validation_error("fusion inputs have mismatched dimensions");
    if (dark.width() != alpha.width() || dark.height() != alpha.height())
        throw validation_error("alpha map dimensions differ from predictions");

    const int w = dark.width(), h = dark.height(), C = dark.channels();
    SoftPredictionTensor out(w, h, C);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* dark_row = dark.pixel(0, y);
        const float* day_row = aligned_day.pixel(0, y);
        const float* a_row = alpha.px.row(y);
        float* o_row = out.pixel(0, y);
        for (int x = 0; x < w; ++x) {
            const float* pz = dark_row + static_cast<std::size_t>(x) * C;
            const float* pd = day_row + static_cast<std::size_t>(x) * C;
            float fz = pz[0], fd = pd[0];
            for (int c = 1; c < C; ++c) {
                if (pz[c] > fz) fz = pz[c];
                if (pd[c] > fd) fd = pd[c];
            }
            const FusionWeights fw = fusion_weights(fz, fd, a_row[x]);
            const double wz = fw.dark, w1 = fw.day;
            float* op = o_row + static_cast<std::size_t>(x) * C;
            for (int c = 0; c < C; ++c) {
                const double lo = std::min(pz[c], pd[c]);
                const double hi = std::max(pz[c], pd[c]);
                const double v = wz * pz[c] + w1 * pd[c];
                op[c] = static_cast<float>(std::clamp(v, lo, hi));
            }
        }
    }
    return out;
}

RefinedPrediction refine_guided(const SoftPredictionTensor& dark_soft, const RgbImage& dark_img,
                                const SoftPredictionTensor& day_soft, const ClassSet& classes,
                                const BilateralParams& bilateral, const FusionParams& fusion_params) {
    if (!dark_soft.same_shape(day_soft))
        throw validation_error("dark and day predictions have mismatched dimensions");
    if (dark_img.width() != dark_soft.width() || dark_img.height() != dark_soft.height())
        throw validation_error("dark image dimensions differ from predictions");

    const LabImage dark_lab = rgb_to_cielab(dark_img);
    const SoftPredictionTensor aligned = cross_bilateral_align(day_soft, dark_lab, bilateral);
    const AlphaMap alpha = alpha_map(aligned, dark_soft, classes, fusion_params);
    SoftPredictionTensor refined = fuse(dark_soft, aligned, alpha);
    SemanticLabelMap hard = argmax_map(refined);
    return RefinedPrediction{std::move(refined), std::move(hard)};
}

} // namespace duskseg
