#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "duskseg/errors.hpp"
#include "duskseg/gps.hpp"

using namespace duskseg;

namespace {

// Independent great-circle implementation for the argmin oracle.
double oracle_distance(double lat1, double lon1, double lat2, double lon2) {
    const double rad = 3.14159265358979323846 / 180.0;
    const double p1 = lat1 * rad, p2 = lat2 * rad;
    const double dp = (lat2 - lat1) * rad, dl = (lon2 - lon1) * rad;
    const double a = std::sin(dp / 2) * std::sin(dp / 2) +
                     std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 6371000.0 * 2.0 * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

/// Closed loop of points roughly every ~9 m.
std::vector<GpsRecord> loop_track(int n, double jitter, unsigned seed, const char* prefix) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> noise(-jitter, jitter);
    std::vector<GpsRecord> out;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * 3.14159265358979323846 * i / n;
        GpsFix fix;
        fix.lat = 47.37 + 0.02 * std::sin(t) + noise(rng);
        fix.lon = 8.54 + 0.03 * std::cos(t) + noise(rng);
        fix.timestamp = i;
        out.push_back({prefix + std::to_string(i), fix});
    }
    return out;
}

} // namespace

TEST_CASE("haversine basics") {
    const GpsFix a{47.4, 8.5, 0};
    CHECK(haversine(a, a) == 0.0);

    const GpsFix e0{0, 0, 0}, e1{0, 1, 0};
    CHECK(std::abs(haversine(e0, e1) - 111195.0) < 1.0);  // R * 1 degree
    CHECK(haversine(e0, e1) == haversine(e1, e0));

    GpsFix bad{91.0, 0, 0};
    CHECK_THROWS_AS(bad.check(), validation_error);
    bad = GpsFix{0, 181.0, 0};
    CHECK_THROWS_AS(bad.check(), validation_error);
}

TEST_CASE("single reference matches everything") {
    const std::vector<GpsRecord> refs{{"day0", {47.37, 8.54, 0}}};
    std::vector<GpsRecord> queries{{"q0", {47.3701, 8.54, 10}}, {"q1", {47.39, 8.54, 11}}};
    const CorrespondenceTable t = match_nearest(queries, refs, MatchOptions{50.0, false});
    REQUIRE(t.entries.size() == 2);
    CHECK(t.entries[0].day_id == "day0");
    CHECK(t.entries[0].matched);  // ~11 m
    CHECK(t.entries[1].day_id == "day0");
    CHECK(!t.entries[1].matched);  // ~2.2 km
}

TEST_CASE("empty reference set is an error") {
    CHECK_THROWS_AS(match_nearest({{"q", {0, 0, 0}}}, {}, MatchOptions{}), validation_error);
}

TEST_CASE("matches equal brute-force argmin on a loop track") {
    const std::vector<GpsRecord> refs = loop_track(500, 0.0, 1, "day");
    const std::vector<GpsRecord> queries = loop_track(137, 5e-5, 2, "q");  // ~5 m jitter
    const CorrespondenceTable t = match_nearest(queries, refs, MatchOptions{50.0, false});

    for (std::size_t i = 0; i < queries.size(); ++i) {
        int best = 0;
        double best_d = 1e18;
        for (std::size_t j = 0; j < refs.size(); ++j) {
            const double d = oracle_distance(queries[i].fix.lat, queries[i].fix.lon,
                                             refs[j].fix.lat, refs[j].fix.lon);
            if (d < best_d) { best = static_cast<int>(j); best_d = d; }
        }
        CHECK(t.entries[i].day_id == refs[best].id);
        CHECK(std::abs(t.entries[i].distance_m - best_d) < 1e-3);
    }
}

TEST_CASE("distance ties break toward the earlier timestamp") {
    std::vector<GpsRecord> refs{{"late", {0.001, 0, 100}}, {"early", {-0.001, 0, 5}}};
    const std::vector<GpsRecord> queries{{"q", {0, 0, 0}}};
    const CorrespondenceTable t = match_nearest(queries, refs, MatchOptions{1000.0, false});
    CHECK(t.entries[0].day_id == "early");
}

TEST_CASE("query beyond max distance is unmatched but still reported") {
    const std::vector<GpsRecord> refs{{"day0", {0, 0, 0}}};
    const std::vector<GpsRecord> queries{{"q", {0.0045, 0, 0}}};  // ~500 m
    const CorrespondenceTable t = match_nearest(queries, refs, MatchOptions{50.0, false});
    CHECK(!t.entries[0].matched);
    CHECK(t.entries[0].day_id == "day0");
    CHECK(t.entries[0].distance_m > 400.0);
}

TEST_CASE("deterministic byte-identical CSV output") {
    const std::vector<GpsRecord> refs = loop_track(50, 0.0, 3, "day");
    const std::vector<GpsRecord> queries = loop_track(20, 1e-4, 4, "q");
    const CorrespondenceTable t1 = match_nearest(queries, refs, MatchOptions{});
    const CorrespondenceTable t2 = match_nearest(queries, refs, MatchOptions{});

    t1.write_csv("corr1.csv");
    t2.write_csv("corr2.csv");
    std::ifstream f1("corr1.csv"), f2("corr2.csv");
    std::stringstream s1, s2;
    s1 << f1.rdbuf();
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());
    CHECK(s1.str().starts_with("query_id,day_id,distance_m,matched\n"));
    std::remove("corr1.csv");
    std::remove("corr2.csv");
}

TEST_CASE("median smoothing suppresses a GPS spike") {
    // Gentle straight track, ~1 m between fixes.
    std::vector<GpsRecord> track;
    for (int i = 0; i < 20; ++i)
        track.push_back({"t" + std::to_string(i), {47.37 + i * 1e-5, 8.54, double(i)}});
    const double clean_lat = track[10].fix.lat;
    track[10].fix.lat += 0.01;  // ~1.1 km spike
    const std::vector<GpsRecord> smoothed = median_smooth_fixes(track);
    CHECK(std::abs(smoothed[10].fix.lat - clean_lat) < 3e-5);  // within a few fixes
    CHECK(smoothed.size() == track.size());
    CHECK(smoothed[10].fix.timestamp == track[10].fix.timestamp);
    // untouched away from the spike
    CHECK(smoothed[2].fix.lat == track[2].fix.lat);
}
