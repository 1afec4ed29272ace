#include "duskseg/threshold.hpp"

#include <string>

#include "duskseg/errors.hpp"

namespace duskseg {

SemanticLabelMap threshold_apply(const SoftPredictionTensor& soft, double theta) {
    const int C = soft.channels();
    const double lo = 1.0 / C;
    if (theta < lo || theta > 1.0)
        throw validation_error("theta " + std::to_string(theta) + " outside [1/C, 1]");

    // At theta == 1/C the channel maximum is always >= theta, so nothing is
    // invalidated; applied directly rather than through the float compare.
    const bool never_invalid = theta <= lo;
    const int h = soft.height(), w = soft.width();
    SemanticLabelMap out{Plane<std::uint8_t>(w, h)};
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const float* p = soft.pixel(0, y);
        std::uint8_t* o = out.px.row(y);
        for (int x = 0; x < w; ++x, p += C) {
            int best = 0;
            for (int c = 1; c < C; ++c)
                if (p[c] > p[best]) best = c;
            o[x] = (never_invalid || p[best] >= theta) ? static_cast<std::uint8_t>(best)
                                                       : kInvalidLabel;
        }
    }
    return out;
}

} // namespace duskseg
