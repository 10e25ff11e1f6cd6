#include "tvmap/tracks.hpp"

#include "tvmap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace tvmap {

std::vector<TrackPoint> interpolate_track(const std::vector<TrackPoint>& points,
                                          std::int64_t step_seconds,
                                          std::int64_t max_gap_seconds) {
    if (step_seconds <= 0)
        throw data_error("interpolate_track: step must be positive");

    // Drop exact duplicate fixes (same timestamp and position).
    std::vector<TrackPoint> pts;
    pts.reserve(points.size());
    for (const auto& pt : points) {
        if (!pts.empty() && pt.timestamp == pts.back().timestamp) {
            if (pt.x == pts.back().x && pt.y == pts.back().y) continue;
            throw data_error("interpolate_track: animal " + pt.animal_id +
                             " has two fixes at timestamp " + std::to_string(pt.timestamp) +
                             " with different positions");
        }
        pts.push_back(pt);
    }
    if (pts.size() < 2)
        throw data_error("interpolate_track: need at least two distinct fixes, got " +
                         std::to_string(pts.size()));
    for (std::size_t j = 1; j < pts.size(); ++j) {
        if (pts[j].timestamp < pts[j - 1].timestamp)
            throw data_error("interpolate_track: non-monotone timestamps for animal " +
                             pts[j].animal_id + " (" + std::to_string(pts[j - 1].timestamp) +
                             " followed by " + std::to_string(pts[j].timestamp) + ")");
    }

    std::vector<TrackPoint> out;
    const std::int64_t t0 = pts.front().timestamp;
    const std::int64_t t_end = pts.back().timestamp;
    std::size_t seg = 0;
    for (std::int64_t tau = t0; tau <= t_end; tau += step_seconds) {
        while (seg + 2 < pts.size() && pts[seg + 1].timestamp <= tau) ++seg;
        const auto& a = pts[seg];
        const auto& b = pts[seg + 1];
        const std::int64_t gap = b.timestamp - a.timestamp;
        if (gap > max_gap_seconds && tau > a.timestamp && tau < b.timestamp) continue;
        TrackPoint p;
        p.animal_id = a.animal_id;
        p.timestamp = tau;
        if (tau <= a.timestamp) {
            p.x = a.x;
            p.y = a.y;
        } else if (tau >= b.timestamp) {
            p.x = b.x;
            p.y = b.y;
        } else {
            const double w = static_cast<double>(tau - a.timestamp) / static_cast<double>(gap);
            p.x = a.x + w * (b.x - a.x);
            p.y = a.y + w * (b.y - a.y);
        }
        out.push_back(std::move(p));
    }
    return out;
}

Eigen::MatrixXd build_time_matrix(const std::vector<std::vector<TrackPoint>>& tracks,
                                  const LatticeSpec& lattice, const GridFrame& frame,
                                  std::int64_t step_seconds) {
    if (step_seconds <= 0)
        throw data_error("build_time_matrix: step must be positive");
    const NeighborGraph graph = build_neighbor_graph(lattice);
    const double step_units = static_cast<double>(step_seconds) / 900.0; // 15-minute units

    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tracks.size()),
                                              graph.p());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (const auto& pt : tracks[i]) {
            const double fc = (pt.x - frame.x0) / frame.cell_size;
            const double fr = (pt.y - frame.y0) / frame.cell_size;
            const int col = static_cast<int>(std::floor(fc));
            const int row = static_cast<int>(std::floor(fr));
            int id = -1;
            if (row >= 0 && row < lattice.n_rows && col >= 0 && col < lattice.n_cols)
                id = graph.cell_id[static_cast<std::size_t>(row) * lattice.n_cols + col];
            if (id < 0)
                throw data_error("build_time_matrix: fix of animal " + pt.animal_id +
                                 " at timestamp " + std::to_string(pt.timestamp) +
                                 " falls outside the active lattice (row " +
                                 std::to_string(row) + ", col " + std::to_string(col) + ")");
            X(static_cast<Eigen::Index>(i), id) += step_units;
        }
    }
    return X;
}

std::pair<std::vector<std::string>, Eigen::VectorXd>
derive_outcomes(const std::vector<SerologyRecord>& records) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& rec : records) {
        if (!seen.emplace(rec.animal_id, rec.serotype).second)
            throw data_error("derive_outcomes: duplicate record for animal " + rec.animal_id +
                             ", serotype " + rec.serotype);
    }

    std::vector<std::string> ids;
    std::vector<double> outcome;
    for (const auto& rec : records) {
        if (rec.baseline_positive) continue;
        if (std::isnan(rec.titer_end)) continue;
        ids.push_back(rec.animal_id);
        outcome.push_back(rec.titer_end > rec.titer_start ? 1.0 : 0.0);
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(outcome.size()));
    for (std::size_t i = 0; i < outcome.size(); ++i) y[static_cast<Eigen::Index>(i)] = outcome[i];
    return {std::move(ids), std::move(y)};
}

} // namespace tvmap
