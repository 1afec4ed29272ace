#include "duskseg/csv.hpp"

#include <cstdio>
#include <fstream>

#include "duskseg/errors.hpp"

namespace duskseg {

std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_curve_csv(std::ostream& out, const UIoUCurve& curve, const ClassSet& classes) {
    out << "theta";
    for (const auto& name : classes.names()) out << ',' << name;
    out << ",mean_uiou,invalidated_pixels\n";
    for (const auto& pt : curve.points) {
        out << format_sig(pt.theta);
        for (const auto& v : pt.per_class) out << ',' << (v ? format_sig(*v) : "n/a");
        out << ',' << format_sig(pt.mean_uiou) << ',' << pt.invalidated_pixels << '\n';
    }
}

void write_curve_csv(const std::filesystem::path& path, const UIoUCurve& curve,
                     const ClassSet& classes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path.string());
    write_curve_csv(out, curve, classes);
}

} // namespace duskseg
