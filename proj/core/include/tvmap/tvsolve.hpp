#pragma once

#include "tvmap/lattice.hpp"
#include "tvmap/model.hpp"

#include <Eigen/Core>

namespace tvmap {

// Solution of min_mu h(mu; y) + lambda ||D mu||_1 together with a dual
// certificate: omega with ||omega||_inf <= lambda and
// ||grad h(mu) + D^T omega||_inf = dual_residual.
struct TvSolution {
    Eigen::VectorXd mu;
    Eigen::VectorXd omega;
    double lambda = 0.0;
    double objective = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Operator-splitting solver (consensus ADMM with a majorized likelihood
// step) combined with a fused-pattern refinement stage: once the active
// pattern stabilizes, the piecewise-constant fit is re-solved exactly on the
// fused groups and certified by routing the gradient through the fused
// edges as a capacitated flow. Deterministic for fixed inputs and config.
TvSolution fit_tv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const DifferenceOperator& D, double lambda,
                  const FitConfig& config = {});

} // namespace tvmap
