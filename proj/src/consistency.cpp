#include "duskseg/consistency.hpp"

#include "duskseg/errors.hpp"

namespace duskseg {

ConsistencyReport& ConsistencyReport::operator+=(const ConsistencyReport& o) {
    jointly_labeled += o.jointly_labeled;
    semantic_agree += o.semantic_agree;
    total_pixels += o.total_pixels;
    mask_agree += o.mask_agree;
    finalize();
    return *this;
}

void ConsistencyReport::finalize() {
    semantic_agreement_pct =
        jointly_labeled == 0
            ? std::nullopt
            : std::optional<double>(100.0 * static_cast<double>(semantic_agree) / jointly_labeled);
    mask_agreement_pct =
        total_pixels == 0 ? 0.0 : 100.0 * static_cast<double>(mask_agree) / total_pixels;
}

ConsistencyReport annotation_consistency(const SemanticLabelMap& labels_a, const InvalidMask& mask_a,
                                         const SemanticLabelMap& labels_b, const InvalidMask& mask_b,
                                         const ClassSet& classes) {
    if (!labels_a.px.same_shape(labels_b.px) || !labels_a.px.same_shape(mask_a.px) ||
        !labels_a.px.same_shape(mask_b.px))
        throw validation_error("annotation pairs have mismatched dimensions");

    const std::uint8_t ignore = classes.ignore_value();
    ConsistencyReport r;
    for (int y = 0; y < labels_a.height(); ++y) {
        const std::uint8_t* la = labels_a.px.row(y);
        const std::uint8_t* lb = labels_b.px.row(y);
        const std::uint8_t* ma = mask_a.px.row(y);
        const std::uint8_t* mb = mask_b.px.row(y);
        for (int x = 0; x < labels_a.width(); ++x) {
            ++r.total_pixels;
            if (ma[x] == mb[x]) ++r.mask_agree;
            if (la[x] != ignore && lb[x] != ignore) {
                ++r.jointly_labeled;
                if (la[x] == lb[x]) ++r.semantic_agree;
            }
        }
    }
    r.finalize();
    return r;
}

} // namespace duskseg
