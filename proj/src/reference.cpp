#include "duskseg/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "duskseg/color.hpp"
#include "duskseg/errors.hpp"
#include "duskseg/threshold.hpp"

namespace duskseg::reference {

LabImage rgb_to_cielab(const RgbImage& img) {
    LabImage out{Plane<LabPixel>(img.width(), img.height())};
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const Rgb8 p = img.px.at(x, y);
            out.px.at(x, y) = srgb_to_lab(p.r, p.g, p.b);
        }
    return out;
}

ConfusionTallies accumulate_confusion(const SemanticLabelMap& gt, const InvalidMask& mask,
                                      const SemanticLabelMap& pred, const ClassSet& classes) {
    if (!gt.px.same_shape(mask.px) || !gt.px.same_shape(pred.px))
        throw validation_error("confusion inputs have mismatched dimensions");
    const int C = classes.count();
    const std::uint8_t ignore = classes.ignore_value();
    ConfusionTallies t(C);
    for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
            const std::uint8_t h = gt.px.at(x, y);
            if (h == ignore) continue;
            if (h >= C)
                throw validation_error("ground truth contains illegal value " +
                                       std::to_string(int(h)));
            const std::uint8_t p = pred.px.at(x, y);
            if (p == h) {
                ++t.per_class[h].tp;
            } else if (p == kInvalidLabel) {
                if (mask.px.at(x, y)) ++t.per_class[h].ti;
                else ++t.per_class[h].fi;
            } else {
                ++t.per_class[h].fn;
                if (p < C) ++t.per_class[p].fp;
            }
        }
    }
    return t;
}

SweepResult sweep_confusion(const SampleSource& source, const ClassSet& classes,
                            const std::vector<double>& theta_grid) {
    SweepResult result;
    result.per_theta.assign(theta_grid.size(), ConfusionTallies(classes.count()));
    result.invalidated.assign(theta_grid.size(), 0);
    for (std::size_t k = 0; k < theta_grid.size(); ++k)
        result.per_theta[k].theta = theta_grid[k];

    for (int i = 0; i < source.size(); ++i) {
        const EvalSample s = source.load(i);
        s.check();
        for (std::size_t k = 0; k < theta_grid.size(); ++k) {
            const SemanticLabelMap pred =
                s.soft ? threshold_apply(*s.soft, theta_grid[k]) : *s.hard;
            result.per_theta[k] += reference::accumulate_confusion(s.gt, s.mask, pred, classes);
            for (int y = 0; y < pred.height(); ++y)
                for (int x = 0; x < pred.width(); ++x)
                    if (pred.px.at(x, y) == kInvalidLabel) ++result.invalidated[k];
        }
    }
    return result;
}

SoftPredictionTensor cross_bilateral_align(const SoftPredictionTensor& day_soft,
                                           const LabImage& dark, const BilateralParams& params) {
    params.check();
    if (day_soft.width() != dark.width() || day_soft.height() != dark.height())
        throw validation_error("bilateral inputs have mismatched dimensions");
    const int w = day_soft.width(), h = day_soft.height(), C = day_soft.channels();
    const int radius = params.radius();
    const double s_inv = 1.0 / (2.0 * params.sigma_s * params.sigma_s);
    const double r_inv = 1.0 / (2.0 * params.sigma_r * params.sigma_r);

    SoftPredictionTensor out(w, h, C);
    std::vector<double> acc(C);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const LabPixel center = dark.px.at(x, y);
            std::fill(acc.begin(), acc.end(), 0.0);
            double wsum = 0.0;
            for (int qy = std::max(0, y - radius); qy <= std::min(h - 1, y + radius); ++qy) {
                for (int qx = std::max(0, x - radius); qx <= std::min(w - 1, x + radius); ++qx) {
                    const double dx = qx - x, dy = qy - y;
                    const LabPixel q = dark.px.at(qx, qy);
                    const double dl = static_cast<double>(q.L) - center.L;
                    const double da = static_cast<double>(q.a) - center.a;
                    const double db = static_cast<double>(q.b) - center.b;
                    const double wgt = std::exp(-(dx * dx + dy * dy) * s_inv) *
                                       std::exp(-(dl * dl + da * da + db * db) * r_inv);
                    wsum += wgt;
                    const float* sq = day_soft.pixel(qx, qy);
                    for (int c = 0; c < C; ++c) acc[c] += wgt * sq[c];
                }
            }
            double total = 0.0;
            for (int c = 0; c < C; ++c) total += acc[c] / wsum;
            float* op = out.pixel(x, y);
            for (int c = 0; c < C; ++c) op[c] = static_cast<float>(acc[c] / wsum / total);
        }
    }
    return out;
}

SoftPredictionTensor fuse(const SoftPredictionTensor& dark, const SoftPredictionTensor& aligned_day,
                          const AlphaMap& alpha) {
    if (!dark.same_shape(aligned_day))
        throw validation_error("fusion inputs have mismatched dimensions");
    const int w = dark.width(), h = dark.height(), C = dark.channels();
    SoftPredictionTensor out(w, h, C);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float* pz = dark.pixel(x, y);
            const float* pd = aligned_day.pixel(x, y);
            double fz = pz[0], fd = pd[0];
            for (int c = 1; c < C; ++c) {
                fz = std::max<double>(fz, pz[c]);
                fd = std::max<double>(fd, pd[c]);
            }
            const double a = alpha.px.at(x, y);
            const double wz = fz / (fz + a * fd);
            const double w1 = a * fd / (fz + a * fd);
            float* op = out.pixel(x, y);
            for (int c = 0; c < C; ++c)
                op[c] = static_cast<float>(wz * pz[c] + w1 * pd[c]);
        }
    }
    return out;
}

} // namespace duskseg::reference
