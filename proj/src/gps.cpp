#include "duskseg/gps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "duskseg/csv.hpp"
#include "duskseg/errors.hpp"

namespace duskseg {

namespace {
constexpr double kEarthRadiusM = 6371000.0;
inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
} // namespace

void GpsFix::check() const {
    if (lat < -90.0 || lat > 90.0)
        throw validation_error("latitude out of range: " + std::to_string(lat));
    if (lon < -180.0 || lon > 180.0)
        throw validation_error("longitude out of range: " + std::to_string(lon));
}

double haversine(const GpsFix& a, const GpsFix& b) {
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(b.lat - a.lat);
    const double dlam = deg2rad(b.lon - a.lon);
    const double s1 = std::sin(dphi / 2.0), s2 = std::sin(dlam / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

CorrespondenceTable match_nearest(const std::vector<GpsRecord>& queries,
                                  const std::vector<GpsRecord>& day_refs,
                                  const MatchOptions& options) {
    if (day_refs.empty())
        throw validation_error("reference set is empty");
    for (const auto& q : queries) q.fix.check();
    for (const auto& r : day_refs) r.fix.check();

    const std::vector<GpsRecord>* qp = &queries;
    const std::vector<GpsRecord>* rp = &day_refs;
    std::vector<GpsRecord> q_smooth, r_smooth;
    if (options.median_smooth) {
        q_smooth = median_smooth_fixes(queries);
        r_smooth = median_smooth_fixes(day_refs);
        qp = &q_smooth;
        rp = &r_smooth;
    }

    CorrespondenceTable table;
    table.entries.resize(qp->size());
    const int nq = static_cast<int>(qp->size());
    const int nr = static_cast<int>(rp->size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nq; ++i) {
        const GpsFix& q = (*qp)[i].fix;
        int best = 0;
        double best_d = haversine(q, (*rp)[0].fix);
        for (int j = 1; j < nr; ++j) {
            const double d = haversine(q, (*rp)[j].fix);
            // Ties break toward the earlier reference timestamp, then the
            // earlier reference index.
            if (d < best_d ||
                (d == best_d && (*rp)[j].fix.timestamp < (*rp)[best].fix.timestamp)) {
                best = j;
                best_d = d;
            }
        }
        table.entries[i] = Correspondence{(*qp)[i].id, (*rp)[best].id, best_d,
                                          best_d <= options.max_dist_m};
    }
    return table;
}

std::vector<GpsRecord> median_smooth_fixes(const std::vector<GpsRecord>& track) {
    constexpr int kHalf = 2;  // window 5
    std::vector<GpsRecord> out = track;
    const int n = static_cast<int>(track.size());
    auto median = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - kHalf), hi = std::min(n - 1, i + kHalf);
        std::vector<double> lats, lons;
        for (int j = lo; j <= hi; ++j) {
            lats.push_back(track[j].fix.lat);
            lons.push_back(track[j].fix.lon);
        }
        out[i].fix.lat = median(lats);
        out[i].fix.lon = median(lons);
    }
    return out;
}

void CorrespondenceTable::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open for writing: " + path.string());
    out << "query_id,day_id,distance_m,matched\n";
    for (const auto& e : entries)
        out << e.query_id << ',' << e.day_id << ',' << format_sig(e.distance_m) << ','
            << (e.matched ? "true" : "false") << '\n';
}

} // namespace duskseg
