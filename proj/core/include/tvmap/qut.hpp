#pragma once

#include "tvmap/lattice.hpp"
#include "tvmap/model.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace tvmap {

// Zero-thresholding function: the smallest lambda at which the TV estimate
// collapses to the constant map, computed as
//   min ||omega||_inf  s.t.  D^T omega = u,  u = X^T (y - sigma(beta0 X 1)).
struct LambdaZeroResult {
    double lambda0 = 0.0;
    Eigen::VectorXd omega;              // dual certificate, lambda0 = ||omega||_inf
    bool feasible = true;
    double beta0 = 0.0;                 // fitted constant-map MLE
    double feasibility_residual = 0.0;  // ||D^T omega - u||_inf
};

LambdaZeroResult lambda_zero(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const DifferenceOperator& D);

// Monte Carlo estimate of the quantile universal threshold: the empirical
// upper-alpha quantile of lambda0(Y, X) with Y drawn under the constant map
// at beta0. Degenerate all-equal draws are discarded and redrawn (10x
// budget per draw). Deterministic per (seed, draw index, attempt).
struct QutResult {
    double lambda_qut = 0.0;
    double alpha = 0.0;
    int m = 0;
    std::vector<double> samples; // sorted lambda0 draws, size m
    std::uint64_t seed = 0;
    int discards = 0;
    double beta0 = 0.0;
};

QutResult qut_estimate(const Eigen::MatrixXd& X, const DifferenceOperator& D, double alpha,
                       int m, std::uint64_t seed, double beta0, int workers = 1);

// k-th smallest with k = ceil((1-alpha) m): the pinned upper-quantile
// convention, shared by QUT, the exact LRT and the bootstrap intervals.
double upper_quantile_order_stat(const std::vector<double>& sorted, double alpha);

enum class TestMethod { TV, LRT_chi2, LRT_exact };

std::string test_method_name(TestMethod method);

struct TestReport {
    double statistic = 0.0;
    double threshold = 0.0;
    bool reject = false;
    TestMethod method = TestMethod::TV;
    double alpha = 0.0;
    int m = 0;
    std::uint64_t seed = 0;
    int discards = 0;
    bool separated = false; // MLE divergence safeguard tripped (LRT only)
};

// TV-test of H0: constant propensity map. Rejects iff lambda0(y, X) is at
// least the quantile universal threshold.
TestReport tv_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const DifferenceOperator& D, double alpha, int m, std::uint64_t seed,
                   int workers = 1);

enum class LrtMode { chi2, exact };

// Likelihood ratio test of the same H0; requires n >= p. chi2 uses the
// asymptotic chi-square(p-1) threshold, exact simulates the statistic's
// null distribution at the fitted beta0.
TestReport lrt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, LrtMode mode,
               double alpha, int m, std::uint64_t seed, int workers = 1);

} // namespace tvmap
