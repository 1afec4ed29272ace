#include "duskseg/confusion.hpp"

#include <exception>
#include <string>

#include <omp.h>

#include "duskseg/errors.hpp"

namespace duskseg {

ConfusionTallies& ConfusionTallies::operator+=(const ConfusionTallies& o) {
    if (per_class.size() != o.per_class.size())
        throw validation_error("cannot merge tallies over different class counts");
    for (std::size_t c = 0; c < per_class.size(); ++c) per_class[c] += o.per_class[c];
    return *this;
}

namespace {

// Single-pixel tally rule shared by the parallel kernel and the serial
// reference. H = ignore contributes nothing; ground truth must not carry
// the invalid sentinel.
inline void tally_pixel(ClassTally* per_class, int num_classes, std::uint8_t ignore,
                        std::uint8_t h, std::uint8_t j, std::uint8_t p) {
    if (h == ignore) return;
    if (h >= num_classes)
        throw validation_error("ground truth contains illegal value " + std::to_string(int(h)));
    if (p == h) {
        ++per_class[h].tp;
    } else if (p == kInvalidLabel) {
        if (j) ++per_class[h].ti; else ++per_class[h].fi;
    } else {
        ++per_class[h].fn;
        if (p < num_classes) ++per_class[p].fp;
    }
}

} // namespace

ConfusionTallies accumulate_confusion(const SemanticLabelMap& gt, const InvalidMask& mask,
                                      const SemanticLabelMap& pred, const ClassSet& classes) {
    if (!gt.px.same_shape(mask.px) || !gt.px.same_shape(pred.px))
        throw validation_error("confusion inputs have mismatched dimensions");
    const int C = classes.count();
    const std::uint8_t ignore = classes.ignore_value();
    const int h = gt.height(), w = gt.width();

    ConfusionTallies total(C);
    // Per-thread tallies merged by integer addition: order-independent.
    // Exceptions cannot cross the parallel region; they are captured and
    // rethrown outside.
    std::exception_ptr error;
#pragma omp parallel
    {
        ConfusionTallies local(C);
#pragma omp for schedule(static) nowait
        for (int y = 0; y < h; ++y) {
            try {
                const std::uint8_t* gr = gt.px.row(y);
                const std::uint8_t* mr = mask.px.row(y);
                const std::uint8_t* pr = pred.px.row(y);
                for (int x = 0; x < w; ++x)
                    tally_pixel(local.per_class.data(), C, ignore, gr[x], mr[x], pr[x]);
            } catch (...) {
#pragma omp critical
                if (!error) error = std::current_exception();
            }
        }
#pragma omp critical
        total += local;
    }
    if (error) std::rethrow_exception(error);
    return total;
}

std::optional<double> uiou_per_class(const ConfusionTallies& t, int c) {
    const ClassTally& k = t.per_class[c];
    const std::uint64_t num = k.tp + k.ti;
    const std::uint64_t den = k.tp + k.ti + k.fp + k.fn + k.fi;
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

double mean_uiou(const ConfusionTallies& t) {
    double sum = 0.0;
    int defined = 0;
    for (std::size_t c = 0; c < t.per_class.size(); ++c) {
        if (auto v = uiou_per_class(t, static_cast<int>(c))) {
            sum += *v;
            ++defined;
        }
    }
    if (defined == 0)
        throw validation_error("empty evaluation: no class has a defined UIoU");
    return sum / defined;
}

} // namespace duskseg
