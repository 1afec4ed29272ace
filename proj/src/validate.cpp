#include "duskseg/validate.hpp"

#include <sstream>

namespace duskseg {

PairValidationReport validate_pair(const SemanticLabelMap& labels, const InvalidMask& mask,
                                   const ClassSet& classes) {
    PairValidationReport r;
    r.labels_width = labels.width();
    r.labels_height = labels.height();
    r.mask_width = mask.width();
    r.mask_height = mask.height();
    if (!labels.px.same_shape(mask.px)) {
        r.dimensions_match = false;
        return r;
    }

    const int c = classes.count();
    const std::uint8_t ignore = classes.ignore_value();
    auto flag = [&](int x, int y, std::uint8_t v, const char* plane) {
        if (r.illegal.size() < PairValidationReport::kMaxItemized)
            r.illegal.push_back({x, y, v, plane});
        ++r.illegal_total;
    };

    for (int y = 0; y < labels.height(); ++y) {
        const std::uint8_t* lr = labels.px.row(y);
        const std::uint8_t* mr = mask.px.row(y);
        for (int x = 0; x < labels.width(); ++x) {
            const std::uint8_t l = lr[x];
            if (l != ignore && l >= c)
                flag(x, y, l, "labels");  // kInvalidLabel is illegal in ground truth too
            const std::uint8_t m = mr[x];
            if (m > 1)
                flag(x, y, m, "mask");
            if (l != ignore && l < c) {
                ++r.labeled_pixels;
                if (m == 1) ++r.labeled_invalid_pixels;
            }
        }
    }
    r.invalid_fraction = r.labeled_pixels == 0
                             ? 0.0
                             : static_cast<double>(r.labeled_invalid_pixels) / r.labeled_pixels;
    return r;
}

std::string PairValidationReport::to_string(const ClassSet& classes) const {
    std::ostringstream os;
    if (!dimensions_match) {
        os << "dimension mismatch: labels " << labels_width << "x" << labels_height << " vs mask "
           << mask_width << "x" << mask_height << "\n";
        return os.str();
    }
    os << "labeled pixels: " << labeled_pixels << "\n";
    os << "labeled invalid fraction: " << invalid_fraction * 100.0 << "%\n";
    if (illegal_total > 0) {
        os << "illegal raster values: " << illegal_total << "\n";
        for (const auto& p : illegal)
            os << "  " << p.plane << " (" << p.x << "," << p.y << ") = " << int(p.value)
               << " (C=" << classes.count() << ", ignore=" << int(classes.ignore_value()) << ")\n";
        if (illegal_total > illegal.size()) os << "  ...\n";
    }
    return os.str();
}

} // namespace duskseg
