#include "tvmap/lattice.hpp"

#include "tvmap/errors.hpp"

#include <queue>
#include <string>

namespace tvmap {

LatticeSpec LatticeSpec::full(int n_rows, int n_cols) {
    LatticeSpec spec;
    spec.n_rows = n_rows;
    spec.n_cols = n_cols;
    spec.mask.assign(static_cast<std::size_t>(n_rows) * n_cols, 1);
    return spec;
}

int LatticeSpec::active_count() const {
    int count = 0;
    for (auto m : mask) count += (m != 0);
    return count;
}

NeighborGraph build_neighbor_graph(const LatticeSpec& spec) {
    if (spec.n_rows <= 0 || spec.n_cols <= 0)
        throw data_error("lattice: grid dimensions must be positive");
    if (spec.mask.size() != static_cast<std::size_t>(spec.n_rows) * spec.n_cols)
        throw data_error("lattice: mask size does not match n_rows * n_cols");

    NeighborGraph graph;
    graph.n_rows = spec.n_rows;
    graph.n_cols = spec.n_cols;
    graph.cell_id.assign(spec.mask.size(), -1);

    for (int r = 0; r < spec.n_rows; ++r) {
        for (int c = 0; c < spec.n_cols; ++c) {
            if (!spec.active(r, c)) continue;
            graph.cell_id[static_cast<std::size_t>(r) * spec.n_cols + c] = graph.p();
            graph.cells.emplace_back(r, c);
        }
    }
    if (graph.cells.empty())
        throw data_error("lattice: mask has no active cells");

    // Connectivity check (BFS over 4-neighborhoods). A disconnected active
    // set would give D a kernel larger than the constants.
    std::vector<char> seen(graph.cells.size(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const auto [r, c] = graph.cells[static_cast<std::size_t>(frontier.front())];
        frontier.pop();
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            const int rr = r + dr[k], cc = c + dc[k];
            if (rr < 0 || rr >= spec.n_rows || cc < 0 || cc >= spec.n_cols) continue;
            const int id = graph.cell_id[static_cast<std::size_t>(rr) * spec.n_cols + cc];
            if (id < 0 || seen[id]) continue;
            seen[id] = 1;
            ++reached;
            frontier.push(id);
        }
    }
    if (reached != graph.p()) {
        int orphan = 0;
        while (seen[orphan]) ++orphan;
        const auto [r0, c0] = graph.cells[0];
        const auto [r1, c1] = graph.cells[orphan];
        throw data_error("lattice: active set is disconnected; cell (" + std::to_string(r0) +
                         "," + std::to_string(c0) + ") cannot reach cell (" +
                         std::to_string(r1) + "," + std::to_string(c1) + ")");
    }

    // Each unordered pair once: emit east and south neighbors only.
    for (int r = 0; r < spec.n_rows; ++r) {
        for (int c = 0; c < spec.n_cols; ++c) {
            const int id = graph.cell_id[static_cast<std::size_t>(r) * spec.n_cols + c];
            if (id < 0) continue;
            if (c + 1 < spec.n_cols) {
                const int east = graph.cell_id[static_cast<std::size_t>(r) * spec.n_cols + c + 1];
                if (east >= 0) graph.pairs.emplace_back(id, east);
            }
            if (r + 1 < spec.n_rows) {
                const int south = graph.cell_id[static_cast<std::size_t>(r + 1) * spec.n_cols + c];
                if (south >= 0) graph.pairs.emplace_back(id, south);
            }
        }
    }
    return graph;
}

DifferenceOperator build_difference_operator(const NeighborGraph& graph) {
    DifferenceOperator op;
    op.q = graph.q();
    op.p = graph.p();
    op.pairs = graph.pairs;
    op.D.resize(op.q, op.p);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(op.q) * 2);
    for (int r = 0; r < op.q; ++r) {
        triplets.emplace_back(r, graph.pairs[r].first, -1.0);
        triplets.emplace_back(r, graph.pairs[r].second, 1.0);
    }
    op.D.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

PropensityMap downsample_map(const PropensityMap& fine, int n_from, int n_to) {
    if (n_to > n_from)
        throw data_error("downsample_map: target grid is finer than the source");
    if (fine.size() != static_cast<Eigen::Index>(n_from) * n_from)
        throw data_error("downsample_map: map length does not match source grid");
    if (n_to == n_from) return fine;

    PropensityMap coarse(static_cast<Eigen::Index>(n_to) * n_to);
    for (int r = 0; r < n_to; ++r) {
        for (int c = 0; c < n_to; ++c) {
            // Fine cell containing the coarse cell's center, in a shared
            // unit-square parameterization of the domain.
            int fr = static_cast<int>((r + 0.5) * n_from / n_to);
            int fc = static_cast<int>((c + 0.5) * n_from / n_to);
            fr = std::min(fr, n_from - 1);
            fc = std::min(fc, n_from - 1);
            coarse[static_cast<Eigen::Index>(r) * n_to + c] =
                fine[static_cast<Eigen::Index>(fr) * n_from + fc];
        }
    }
    return coarse;
}

} // namespace tvmap
