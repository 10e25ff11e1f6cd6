#include <doctest.h>

#include "tvmap/errors.hpp"
#include "tvmap/tracks.hpp"

#include <cmath>

using namespace tvmap;

namespace {

TrackPoint pt(const char* id, std::int64_t ts, double x, double y) {
    return TrackPoint{id, ts, x, y};
}

constexpr std::int64_t kStep = 900;      // 15 min
constexpr std::int64_t kMaxGap = 14400;  // 4 h

} // namespace

TEST_CASE("two fixes 30 minutes apart interpolate to the segment midpoint") {
    const auto out = interpolate_track({pt("a", 0, 0.0, 0.0), pt("a", 1800, 10.0, -4.0)},
                                       kStep, kMaxGap);
    REQUIRE(out.size() == 3);
    CHECK(out[1].timestamp == 900);
    CHECK(out[1].x == doctest::Approx(5.0));
    CHECK(out[1].y == doctest::Approx(-2.0));
}

TEST_CASE("already-regular tracks come back unchanged") {
    std::vector<TrackPoint> regular;
    for (int k = 0; k < 10; ++k) regular.push_back(pt("a", k * kStep, 2.0 * k, 1.0));
    const auto once = interpolate_track(regular, kStep, kMaxGap);
    REQUIRE(once.size() == regular.size());
    for (std::size_t k = 0; k < regular.size(); ++k) {
        CHECK(once[k].timestamp == regular[k].timestamp);
        CHECK(once[k].x == doctest::Approx(regular[k].x));
    }
    // idempotence
    const auto twice = interpolate_track(once, kStep, kMaxGap);
    REQUIRE(twice.size() == once.size());
    for (std::size_t k = 0; k < once.size(); ++k)
        CHECK(twice[k].x == doctest::Approx(once[k].x));
}

TEST_CASE("grid instants inside a long gap are dropped") {
    // 6 h apart with a 4 h max gap: only the two endpoints survive.
    const auto out = interpolate_track({pt("a", 0, 0.0, 0.0), pt("a", 21600, 5.0, 5.0)},
                                       kStep, kMaxGap);
    REQUIRE(out.size() == 2);
    CHECK(out[0].timestamp == 0);
    CHECK(out[1].timestamp == 21600);
}

TEST_CASE("interpolation input validation") {
    CHECK_THROWS_AS(interpolate_track({pt("a", 0, 0, 0)}, kStep, kMaxGap), data_error);
    CHECK_THROWS_WITH_AS(
        interpolate_track({pt("a", 900, 0, 0), pt("a", 0, 1, 1)}, kStep, kMaxGap),
        doctest::Contains("non-monotone"), data_error);
    // duplicate fixes at the same instant and position are dropped
    const auto out = interpolate_track(
        {pt("a", 0, 0, 0), pt("a", 0, 0, 0), pt("a", 900, 1, 1)}, kStep, kMaxGap);
    CHECK(out.size() == 2);
}

TEST_CASE("time matrix counts step units per cell") {
    const LatticeSpec lattice = LatticeSpec::full(2, 2);
    const GridFrame frame{0.0, 0.0, 10.0};

    std::vector<TrackPoint> track;
    for (int k = 0; k < 96; ++k) track.push_back(pt("a", k * kStep, 5.0, 5.0));
    const auto X = build_time_matrix({track}, lattice, frame, kStep);
    REQUIRE(X.rows() == 1);
    REQUIRE(X.cols() == 4);
    CHECK(X(0, 0) == doctest::Approx(96.0));
    CHECK(X.row(0).sum() == doctest::Approx(96.0));

    // two animals in disjoint single cells
    std::vector<TrackPoint> other;
    for (int k = 0; k < 10; ++k) other.push_back(pt("b", k * kStep, 15.0, 15.0));
    const auto X2 = build_time_matrix({track, other}, lattice, frame, kStep);
    CHECK(X2(0, 0) == doctest::Approx(96.0));
    CHECK(X2(1, 3) == doctest::Approx(10.0));
    CHECK(X2(0, 3) == 0.0);
    CHECK(X2(1, 0) == 0.0);
}

TEST_CASE("dwell conservation: row sums equal point count times step units") {
    const LatticeSpec lattice = LatticeSpec::full(3, 3);
    const GridFrame frame{-10.0, -10.0, 7.0};
    std::vector<TrackPoint> track;
    for (int k = 0; k < 50; ++k)
        track.push_back(pt("a", k * 1800, -9.0 + 0.4 * k, -9.0 + 0.35 * k));
    const auto X = build_time_matrix({track}, lattice, frame, 1800);
    CHECK(X.row(0).sum() == doctest::Approx(50.0 * 2.0).epsilon(1e-12));
}

TEST_CASE("fixes in masked cells are rejected with animal id and timestamp") {
    LatticeSpec lattice = LatticeSpec::full(2, 2);
    lattice.mask[3] = 0;
    const GridFrame frame{0.0, 0.0, 10.0};
    const std::vector<TrackPoint> track{pt("deer42", 0, 5.0, 5.0), pt("deer42", 900, 15.0, 15.0)};
    CHECK_THROWS_WITH_AS(build_time_matrix({track}, lattice, frame, kStep),
                         doctest::Contains("deer42"), data_error);
    const std::vector<TrackPoint> outside{pt("deer7", 0, 500.0, 5.0)};
    CHECK_THROWS_WITH_AS(build_time_matrix({outside}, lattice, frame, kStep),
                         doctest::Contains("deer7"), data_error);
}

TEST_CASE("derive_outcomes: strict increase, exclusions, duplicates") {
    std::vector<SerologyRecord> records;
    records.push_back({"a1", "EHDV-1", 0.0, 8.0, false});   // infected
    records.push_back({"a2", "EHDV-1", 4.0, 4.0, false});   // equal titers -> 0
    records.push_back({"a3", "EHDV-1", 2.0, 1.0, false});   // decreased -> 0
    records.push_back({"a4", "EHDV-1", 0.0, 8.0, true});    // baseline positive -> excluded
    records.push_back({"a5", "EHDV-1", 0.0, std::nan(""), false}); // missing end -> excluded

    const auto [ids, y] = derive_outcomes(records);
    REQUIRE(ids.size() == 3);
    CHECK(ids[0] == "a1");
    CHECK(y[0] == 1.0);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == 0.0);

    records.push_back({"a1", "EHDV-1", 0.0, 2.0, false});
    CHECK_THROWS_WITH_AS(derive_outcomes(records), doctest::Contains("duplicate"), data_error);
}
