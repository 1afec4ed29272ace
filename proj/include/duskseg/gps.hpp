#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace duskseg {

struct GpsFix {
    double lat = 0.0;       // degrees WGS84, [-90, 90]
    double lon = 0.0;       // degrees WGS84, [-180, 180]
    double timestamp = 0.0; // seconds

    void check() const;
};

/// Great-circle distance in meters, Earth radius 6,371,000 m.
double haversine(const GpsFix& a, const GpsFix& b);

struct Correspondence {
    std::string query_id;
    std::string day_id;
    double distance_m = 0.0;
    bool matched = false;  // false when distance exceeds max_dist
};

struct CorrespondenceTable {
    std::vector<Correspondence> entries;  // one per query, in query order

    void write_csv(const std::filesystem::path& path) const;
};

struct GpsRecord {
    std::string id;
    GpsFix fix;
};

struct MatchOptions {
    double max_dist_m = 50.0;
    bool median_smooth = false;  // sliding-window median (window 5) of fixes
};

/// Nearest day reference per query by great-circle distance; ties break
/// toward the earlier reference timestamp, then the earlier reference
/// index. Deterministic: identical inputs give byte-identical tables.
CorrespondenceTable match_nearest(const std::vector<GpsRecord>& queries,
                                  const std::vector<GpsRecord>& day_refs,
                                  const MatchOptions& options = {});

/// Sliding-window median (window 5, clipped at the ends) over lat and lon
/// independently; timestamps unchanged.
std::vector<GpsRecord> median_smooth_fixes(const std::vector<GpsRecord>& track);

} // namespace duskseg
