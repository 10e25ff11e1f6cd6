#pragma once

#include "tvmap/lattice.hpp"
#include "tvmap/simulate.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>

namespace tvmap {

enum class EstimatorKind { TV, Empirical, GPR };

EstimatorKind parse_estimator(const std::string& name);
std::string estimator_name(EstimatorKind kind);

// Per-cell fraction of dwell contributed by infected individuals,
// sum_{y_i=1} X[i,l] / sum_i X[i,l]. Cells nobody visited are NaN and stay
// excluded from metrics downstream.
Eigen::VectorXd empirical_estimate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Min-max scaling to [0, 1]; NaN entries pass through, and a constant map
// scales to all zeros (a flat estimate claims "no elevated region").
Eigen::VectorXd minmax_scale01(const Eigen::VectorXd& v);

namespace detail {
// Squared-exponential GP posterior mean on the t (log-odds) scale.
Eigen::VectorXd gp_posterior_mean(const Eigen::MatrixXd& train_xy,
                                  const Eigen::VectorXd& train_t,
                                  const Eigen::MatrixXd& pred_xy, double lengthscale,
                                  double signal_var, double noise_var);
} // namespace detail

// Smooths the empirical map: clamp to [0.01, 0.99], take log-odds, fit GP
// regression over cell centers with a squared-exponential kernel, pick
// (lengthscale, signal, noise) on a log-spaced grid by K-fold CV, predict at
// every active cell (including unvisited ones), return inverse-logits.
// A constant empirical map short-circuits to that constant.
Eigen::VectorXd gpr_logodds(const Eigen::VectorXd& empirical_map, const NeighborGraph& graph,
                            int cv_folds, std::uint64_t seed);

// Mean squared difference between the min-max-scaled estimate (on the full
// N grid) and the nearest-neighbor-downsampled, scaled truth. NaN estimate
// cells are excluded.
double scaled_mse(const Eigen::VectorXd& estimate, const ProfileMap& truth, int N);

} // namespace tvmap
