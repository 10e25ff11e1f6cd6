#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace tvmap::detail {

// Routes supply through undirected capacitated edges (|flow| <= cap each).
// Node l must end with net inflow = supply[l]; node_residual reports what
// could not be met. cut_side marks the source-side min-cut when infeasible.
struct RouteResult {
    Eigen::VectorXd edge_flow;     // signed along the pair orientation first->second
    Eigen::VectorXd node_residual; // supply - achieved net inflow
    double max_residual = 0.0;
    bool feasible = false;
    std::vector<char> cut_side;
};

RouteResult route_with_capacity(int n_nodes,
                                const std::vector<std::pair<int, int>>& edges,
                                const Eigen::VectorXd& supply, double cap);

// min ||omega||_inf subject to (net inflow)_l = supply_l: the Chebyshev-norm
// flow problem behind the zero-thresholding function. Solved exactly via
// max-flow min-cut and a ratio (Dinkelbach) iteration on bottleneck cuts.
struct CongestionResult {
    double lambda0 = 0.0;
    Eigen::VectorXd edge_flow;
    double max_residual = 0.0;
    bool feasible = false;
    int maxflow_calls = 0;
};

CongestionResult min_congestion_flow(int n_nodes,
                                     const std::vector<std::pair<int, int>>& edges,
                                     const Eigen::VectorXd& supply);

} // namespace tvmap::detail
