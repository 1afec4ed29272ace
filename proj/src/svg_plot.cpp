#include "duskseg/svg_plot.hpp"

#include <algorithm>
#include <fstream>

#include "duskseg/csv.hpp"
#include "duskseg/errors.hpp"

namespace duskseg {

void write_curve_svg(const std::filesystem::path& path, const UIoUCurve& curve) {
    if (curve.points.empty())
        throw validation_error("cannot plot an empty curve");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path.string());

    constexpr double W = 640, H = 400;
    constexpr double ml = 60, mr = 20, mt = 20, mb = 45;  // margins
    const double x0 = curve.points.front().theta;
    const double x1 = std::max(curve.points.back().theta, x0 + 1e-9);
    double ymax = 0.0;
    for (const auto& p : curve.points) ymax = std::max(ymax, p.mean_uiou * 100.0);
    ymax = std::max(1.0, ymax * 1.1);

    auto px = [&](double theta) { return ml + (theta - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double pct) { return H - mb - pct / ymax * (H - mt - mb); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
        << "\" text-anchor=\"middle\" font-size=\"14\">confidence threshold</text>\n";
    out << "<text x=\"15\" y=\"" << (mt + H - mb) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 "
        << (mt + H - mb) / 2 << ")\">mean UIoU (%)</text>\n";
    // x tick labels at the range ends
    out << "<text x=\"" << px(x0) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << format_sig(x0) << "</text>\n";
    out << "<text x=\"" << px(x1) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << format_sig(x1) << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(0) + 4
        << "\" text-anchor=\"end\" font-size=\"12\">0</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << py(ymax) + 4
        << "\" text-anchor=\"end\" font-size=\"12\">" << format_sig(ymax) << "</text>\n";

    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& p : curve.points)
        out << format_sig(px(p.theta)) << ',' << format_sig(py(p.mean_uiou * 100.0)) << ' ';
    out << "\"/>\n";

    const auto& best = curve.points[curve.argmax_index];
    out << "<circle cx=\"" << format_sig(px(best.theta)) << "\" cy=\""
        << format_sig(py(best.mean_uiou * 100.0)) << "\" r=\"4\" fill=\"black\"/>\n";
    out << "<text x=\"" << format_sig(px(best.theta) + 8) << "\" y=\""
        << format_sig(py(best.mean_uiou * 100.0) - 8) << "\" font-size=\"12\">"
        << format_sig(best.mean_uiou * 100.0) << "% @ " << format_sig(best.theta) << "</text>\n";
    out << "</svg>\n";
}

} // namespace duskseg
