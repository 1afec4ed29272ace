#include "duskseg/theorem1.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "duskseg/errors.hpp"
#include "duskseg/threshold.hpp"

namespace duskseg {

Theorem1Report verify_theorem1(const SampleSource& source, const ClassSet& classes) {
    const int C = classes.count();
    const std::uint8_t ignore = classes.ignore_value();
    const int count = source.size();

    Theorem1Report report;
    report.per_class.resize(C);
    report.theta2 = std::numeric_limits<double>::infinity();

    // Pass 1: confidence extrema over labeled pixels, witness flags, and
    // tallies at theta = 1/C (standard IoU).
    float m1 = -1.f;  // max confidence where J=1
    float m2 = std::numeric_limits<float>::infinity();  // min confidence where J=0
    bool any_invalid = false;
    std::vector<std::uint8_t> witness(C, 0);
    ConfusionTallies at_base(C, 1.0 / C);

    std::exception_ptr error;
#pragma omp parallel
    {
        float l_m1 = -1.f, l_m2 = std::numeric_limits<float>::infinity();
        bool l_any = false;
        std::vector<std::uint8_t> l_wit(C, 0);
        ConfusionTallies l_tallies(C, 1.0 / C);
#pragma omp for schedule(dynamic) nowait
        for (int i = 0; i < count; ++i) {
            try {
                const EvalSample s = source.load(i);
                s.check();
                if (!s.soft)
                    throw validation_error("theorem check needs soft predictions");
                if (s.soft->channels() != C)
                    throw validation_error("soft prediction channel count differs from class set");
                for (int y = 0; y < s.gt.height(); ++y) {
                    const std::uint8_t* gr = s.gt.px.row(y);
                    const std::uint8_t* mr = s.mask.px.row(y);
                    const float* sp = s.soft->pixel(0, y);
                    for (int x = 0; x < s.gt.width(); ++x) {
                        const std::uint8_t g = gr[x];
                        if (g == ignore) continue;
                        const float* p = sp + static_cast<std::size_t>(x) * C;
                        int best = 0;
                        for (int c = 1; c < C; ++c)
                            if (p[c] > p[best]) best = c;
                        const float f = p[best];
                        if (mr[x]) {
                            l_any = true;
                            if (f > l_m1) l_m1 = f;
                            // A misclassified invalid pixel sits in FN(1/C) of its
                            // ground-truth class and FP(1/C) of its argmax class.
                            if (best != g) { l_wit[g] = 1; l_wit[best] = 1; }
                        } else {
                            if (f < l_m2) l_m2 = f;
                        }
                        if (best == g) ++l_tallies.per_class[g].tp;
                        else { ++l_tallies.per_class[g].fn; ++l_tallies.per_class[best].fp; }
                    }
                }
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
#pragma omp critical
        {
            if (l_m1 > m1) m1 = l_m1;
            if (l_m2 < m2) m2 = l_m2;
            any_invalid = any_invalid || l_any;
            for (int c = 0; c < C; ++c) witness[c] |= l_wit[c];
            at_base += l_tallies;
        }
    }
    if (error) std::rethrow_exception(error);

    report.has_invalid_pixels = any_invalid;
    report.theta1 = any_invalid ? m1 : 0.0;
    report.theta2 = m2;
    // Smallest legal threshold strictly above every J=1 confidence. Must
    // stay above 1/C (where invalidation is off), at or below theta2 (so
    // no J=0 pixel gets invalidated) and within [1/C, 1].
    const double theta_eval =
        any_invalid ? std::max(static_cast<double>(nextafterf(m1, 2.0f)),
                               std::nextafter(1.0 / C, 2.0))
                    : 0.0;
    report.theta_eval = theta_eval;
    report.separation_holds = any_invalid && static_cast<double>(m1) < static_cast<double>(m2) &&
                              theta_eval <= 1.0 && theta_eval <= static_cast<double>(m2);

    for (int c = 0; c < C; ++c) {
        report.per_class[c].witness = witness[c] != 0;
        report.per_class[c].iou = uiou_per_class(at_base, c);
    }
    if (!report.separation_holds)
        return report;

    // Pass 2: tallies at theta_eval, which invalidates exactly the J=1
    // labeled pixels.
    ConfusionTallies at_eval(C, theta_eval);
#pragma omp parallel
    {
        ConfusionTallies l_tallies(C, theta_eval);
#pragma omp for schedule(dynamic) nowait
        for (int i = 0; i < count; ++i) {
            try {
                const EvalSample s = source.load(i);
                const SemanticLabelMap pred = threshold_apply(*s.soft, theta_eval);
                l_tallies += accumulate_confusion(s.gt, s.mask, pred, classes);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
#pragma omp critical
        at_eval += l_tallies;
    }
    if (error) std::rethrow_exception(error);

    for (int c = 0; c < C; ++c) {
        auto& pc = report.per_class[c];
        pc.uiou_at_eval = uiou_per_class(at_eval, c);
        pc.inequality_checked = pc.witness && pc.iou.has_value() && pc.uiou_at_eval.has_value();
        if (pc.inequality_checked)
            pc.inequality_verified = *pc.iou < *pc.uiou_at_eval;
    }
    return report;
}

} // namespace duskseg
