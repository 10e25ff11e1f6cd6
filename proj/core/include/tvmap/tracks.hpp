#pragma once

#include "tvmap/lattice.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tvmap {

// One GPS fix. Timestamps are UTC seconds since the epoch; coordinates are
// projected planar meters (the library does no CRS transforms).
struct TrackPoint {
    std::string animal_id;
    std::int64_t timestamp = 0;
    double x = 0.0;
    double y = 0.0;
};

struct SerologyRecord {
    std::string animal_id;
    std::string serotype;            // EHDV-1 | EHDV-2 | EHDV-6
    double titer_start = 0.0;
    double titer_end = 0.0;          // NaN when the end titer is missing
    bool baseline_positive = false;
};

// Design matrix of dwell times (one 15-minute interval == 1.0) plus binary
// outcomes. step_units is the dwell credited per retained sample; it matters
// for bootstrap location resampling.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<std::string> animal_ids;
    LatticeSpec lattice;
    double step_units = 1.0;
};

// Placement of the lattice in projected coordinates: cell (row, col) covers
// [x0 + col*s, x0 + (col+1)*s) x [y0 + row*s, y0 + (row+1)*s).
struct GridFrame {
    double x0 = 0.0;
    double y0 = 0.0;
    double cell_size = 1.0;
};

// Resamples one animal's track onto a regular step grid anchored at the
// first observation, interpolating positions linearly in time. Grid instants
// strictly inside an observation gap longer than max_gap are omitted.
std::vector<TrackPoint> interpolate_track(const std::vector<TrackPoint>& points,
                                          std::int64_t step_seconds,
                                          std::int64_t max_gap_seconds);

// X[i, l] = (interpolated points of animal i in cell l) * (step in 15-minute
// units). Every fix must land in an active cell; a fix in a masked cell or
// outside the grid aborts with the animal id and timestamp.
Eigen::MatrixXd build_time_matrix(const std::vector<std::vector<TrackPoint>>& tracks,
                                  const LatticeSpec& lattice, const GridFrame& frame,
                                  std::int64_t step_seconds);

// Binary outcomes for a single serotype: excludes baseline-positive animals
// and animals with a missing end titer; y = 1 iff titer strictly increased.
std::pair<std::vector<std::string>, Eigen::VectorXd>
derive_outcomes(const std::vector<SerologyRecord>& records);

} // namespace tvmap
