#pragma once

#include "tvmap/baselines.hpp"
#include "tvmap/lattice.hpp"
#include "tvmap/simulate.hpp"
#include "tvmap/tracks.hpp"

#include <Eigen/Core>
#include <cstdint>

namespace tvmap {

struct BootstrapConfig {
    int n_boot = 500;       // augmented sample size (> n allowed and intended)
    int n_locations = 720;  // resampled dwell observations per bootstrap individual
    int runs = 30;          // bootstrap replicates
    double alpha = 0.05;    // pointwise interval level
    std::uint64_t seed = 0;
    int qut_m = 200;        // QUT Monte Carlo size per TV replicate
    double qut_alpha = 0.05;
    int gpr_folds = 3;
    int workers = 1;
};

struct BootstrapResult {
    Eigen::VectorXd mu_hat;      // estimate on the original data
    Eigen::VectorXd mu_bar_boot; // pointwise replicate mean
    Eigen::VectorXd mu_bc;       // 2 mu_hat - mu_bar_boot, exact
    Eigen::VectorXd lower;       // pointwise alpha/2 order statistic (raw axis)
    Eigen::VectorXd upper;       // pointwise 1 - alpha/2 order statistic (raw axis)
    // Same order statistics after min-max scaling each replicate map to
    // [0,1]; this is the axis coverage is evaluated on.
    Eigen::VectorXd scaled_lower;
    Eigen::VectorXd scaled_upper;
    int replicate_count = 0;
    int degenerate_redraws = 0;
    EstimatorKind estimator = EstimatorKind::TV;
};

// Fits the chosen estimator on the original data and on `runs` augmented
// resamples: n_boot individuals drawn with replacement, each individual's
// dwell row rebuilt by drawing n_locations cells from the donor's own
// normalized dwell distribution (preserving its spatial signature), the
// donor's outcome carried over. TV replicates recompute QUT. Deterministic
// from config.seed for any worker count.
BootstrapResult bootstrap_fit(const Dataset& dataset, const DifferenceOperator& D,
                              const BootstrapConfig& config, EstimatorKind estimator);

// Fits one estimator on a dataset (the same path bootstrap replicates use).
Eigen::VectorXd fit_estimator(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const NeighborGraph& graph, const DifferenceOperator& D,
                              EstimatorKind estimator, const BootstrapConfig& config,
                              std::uint64_t seed);

struct Scenario {
    ProfileName profile = ProfileName::lake;
    int N0 = 50;
    int n0 = 5000;
    int T = 2880;
    int n = 500;
    int N = 30;
    int t = 1;
    double target_prevalence = 0.3;
    double signal_spread = 0.0; // 0: symmetric amplitudes, no baseline offset
    std::uint64_t seed = 0;
    int workers = 1;
};

// Simulates one dataset of the scenario (fresh population, infections,
// subsample) with seeds derived from scenario.seed and the run index.
Dataset simulate_scenario_dataset(const Scenario& scenario, std::uint64_t run_index);

struct CoverageStats {
    double mse_bc = 0.0;    // scaled MSE of the bias-corrected map
    double coverage = 0.0;  // fraction of cells whose scaled truth is inside the band
    double width = 0.0;     // mean scaled interval width
    int runs = 0;
};

// Monte Carlo coverage study: repeats simulate -> bootstrap_fit, scales the
// bias-corrected map and its bounds by the map's own min-max affine, and
// checks where the scaled truth falls inside the pointwise band.
CoverageStats coverage_eval(const Scenario& scenario, EstimatorKind estimator, int mc_runs,
                            const BootstrapConfig& config);

} // namespace tvmap
