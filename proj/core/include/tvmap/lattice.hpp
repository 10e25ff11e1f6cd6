#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <utility>
#include <vector>

namespace tvmap {

// Per-cell propensity values on the logit scale, aligned to lattice cell ids.
using PropensityMap = Eigen::VectorXd;

// Masked rectangular grid of cells. mask is row-major; true marks a cell
// that belongs to the domain.
struct LatticeSpec {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::uint8_t> mask; // row-major, size n_rows * n_cols

    static LatticeSpec full(int n_rows, int n_cols);

    bool active(int row, int col) const {
        return mask[static_cast<std::size_t>(row) * n_cols + col] != 0;
    }
    int active_count() const;
};

// Active cells with dense ids (row-major order) and the unordered
// north-south-east-west neighbor pairs between them.
struct NeighborGraph {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> cell_id;                    // row-major, -1 for masked cells
    std::vector<std::pair<int, int>> cells;      // id -> (row, col)
    std::vector<std::pair<int, int>> pairs;      // (lo, hi) cell ids, each pair once

    int p() const { return static_cast<int>(cells.size()); }
    int q() const { return static_cast<int>(pairs.size()); }
};

// Sparse signed incidence matrix: row r has -1 at the first cell of pair r
// and +1 at the second, so ||D mu||_1 is the sum of |mu_l - mu_l'| over
// unordered neighbor pairs.
struct DifferenceOperator {
    int q = 0;
    int p = 0;
    Eigen::SparseMatrix<double> D;
    std::vector<std::pair<int, int>> pairs; // copied from the graph; row order of D
};

// Validates the spec (at least one active cell, connected active set) and
// enumerates neighbor pairs. Throws data_error with two disconnected cell
// coordinates if the active set splits.
NeighborGraph build_neighbor_graph(const LatticeSpec& spec);

DifferenceOperator build_difference_operator(const NeighborGraph& graph);

// Nearest-neighbor downsampling between full rectangular grids: each coarse
// cell takes the value of the fine cell containing the coarse cell's center.
PropensityMap downsample_map(const PropensityMap& fine, int n_from, int n_to);

} // namespace tvmap
