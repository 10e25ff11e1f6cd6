#include "tvmap/bootstrap.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/model.hpp"
#include "tvmap/parallel.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/rng.hpp"
#include "tvmap/tvsolve.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

namespace tvmap {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd fit_estimator(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const NeighborGraph& graph, const DifferenceOperator& D,
                              EstimatorKind estimator, const BootstrapConfig& config,
                              std::uint64_t seed) {
    switch (estimator) {
        case EstimatorKind::Empirical:
            return empirical_estimate(X, y);
        case EstimatorKind::GPR:
            return gpr_logodds(empirical_estimate(X, y), graph, config.gpr_folds,
                               derive_seed(seed, 2));
        case EstimatorKind::TV: {
            const double beta0 = fit_intercept(X, y);
            const QutResult qut = qut_estimate(X, D, config.qut_alpha, config.qut_m,
                                               derive_seed(seed, 1), beta0, 1);
            return fit_tv(X, y, D, qut.lambda_qut).mu;
        }
    }
    throw data_error("fit_estimator: unknown estimator");
}

BootstrapResult bootstrap_fit(const Dataset& dataset, const DifferenceOperator& D,
                              const BootstrapConfig& config, EstimatorKind estimator) {
    if (config.n_boot <= 0) throw data_error("bootstrap: n_boot must be positive");
    if (config.runs < 2) throw data_error("bootstrap: need at least 2 replicates");
    if (config.n_locations <= 0) throw data_error("bootstrap: n_locations must be positive");
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw data_error("bootstrap: alpha must lie in (0, 1)");

    const Eigen::Index n = dataset.X.rows();
    const Eigen::Index p = dataset.X.cols();
    const NeighborGraph graph = build_neighbor_graph(dataset.lattice);
    if (graph.p() != p) throw data_error("bootstrap: dataset lattice does not match X");

    // Per-donor dwell CDFs for the location resampling.
    Eigen::MatrixXd cdf(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index l = 0; l < p; ++l) {
            acc += dataset.X(i, l);
            cdf(i, l) = acc;
        }
        if (acc <= 0.0)
            throw data_error("bootstrap: row " + std::to_string(i) + " of X has no dwell time");
    }

    BootstrapResult result;
    result.estimator = estimator;
    result.mu_hat = fit_estimator(dataset.X, dataset.y, graph, D, estimator, config,
                                  derive_seed(config.seed, 0));

    std::vector<Eigen::VectorXd> maps(static_cast<std::size_t>(config.runs));
    std::atomic<int> redraws{0};

    parallel_for(static_cast<std::size_t>(config.runs), config.workers, [&](std::size_t r) {
        const std::uint64_t rep_seed = derive_seed(config.seed, 1 + r);
        Eigen::MatrixXd Xb(config.n_boot, p);
        Eigen::VectorXd yb(config.n_boot);
        bool built = false;
        for (int attempt = 0; attempt < 10 && !built; ++attempt) {
            Rng rng(derive_seed(rep_seed, 0, static_cast<std::uint64_t>(attempt)));
            Xb.setZero();
            bool any0 = false, any1 = false;
            for (int bi = 0; bi < config.n_boot; ++bi) {
                const auto donor = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
                yb[bi] = dataset.y[donor];
                (yb[bi] == 1.0 ? any1 : any0) = true;
                const double total = cdf(donor, p - 1);
                for (int s = 0; s < config.n_locations; ++s) {
                    const double pick = rng.uniform() * total;
                    // first cell whose cumulative dwell exceeds the draw
                    const double* row = cdf.row(donor).data();
                    Eigen::Index lo = 0, hi = p - 1;
                    while (lo < hi) {
                        const Eigen::Index mid = (lo + hi) / 2;
                        if (row[mid] > pick) hi = mid; else lo = mid + 1;
                    }
                    Xb(bi, lo) += dataset.step_units;
                }
            }
            if (any0 && any1) built = true;
            else ++redraws;
        }
        if (!built)
            throw data_error("bootstrap: replicate " + std::to_string(r) +
                             " drew all-equal outcomes 10 times; data too unbalanced");
        maps[r] = fit_estimator(Xb, yb, graph, D, estimator, config, derive_seed(rep_seed, 9));
    });

    result.degenerate_redraws = redraws.load();
    result.replicate_count = config.runs;

    // Pointwise aggregation from sorted replicate values so the outputs are
    // invariant to replicate order. Bounds use the QUT order-statistic
    // convention: upper = ceil((1 - alpha/2) R)-th smallest, lower mirrored.
    const auto quantile_bounds = [&](const std::vector<Eigen::VectorXd>& source,
                                     Eigen::VectorXd& lo_map, Eigen::VectorXd& hi_map,
                                     Eigen::VectorXd* mean_map) {
        std::vector<double> vals;
        for (Eigen::Index l = 0; l < p; ++l) {
            vals.clear();
            for (const auto& m : source) {
                if (!std::isnan(m[l])) vals.push_back(m[l]);
            }
            if (vals.empty()) {
                lo_map[l] = kNaN;
                hi_map[l] = kNaN;
                if (mean_map) (*mean_map)[l] = kNaN;
                continue;
            }
            std::sort(vals.begin(), vals.end());
            if (mean_map) {
                double sum = 0.0;
                for (double v : vals) sum += v;
                (*mean_map)[l] = sum / static_cast<double>(vals.size());
            }
            const int R = static_cast<int>(vals.size());
            int k_up = static_cast<int>(std::ceil((1.0 - config.alpha / 2.0) * R));
            k_up = std::clamp(k_up, 1, R);
            const int k_lo = R + 1 - k_up;
            hi_map[l] = vals[static_cast<std::size_t>(k_up - 1)];
            lo_map[l] = vals[static_cast<std::size_t>(k_lo - 1)];
        }
    };

    result.mu_bar_boot.resize(p);
    result.lower.resize(p);
    result.upper.resize(p);
    quantile_bounds(maps, result.lower, result.upper, &result.mu_bar_boot);

    std::vector<Eigen::VectorXd> scaled_maps;
    scaled_maps.reserve(maps.size());
    for (const auto& m : maps) scaled_maps.push_back(minmax_scale01(m));
    result.scaled_lower.resize(p);
    result.scaled_upper.resize(p);
    quantile_bounds(scaled_maps, result.scaled_lower, result.scaled_upper, nullptr);

    result.mu_bc = 2.0 * result.mu_hat - result.mu_bar_boot;
    return result;
}

Dataset simulate_scenario_dataset(const Scenario& scenario, std::uint64_t run_index) {
    const std::uint64_t run_seed = derive_seed(scenario.seed, run_index);
    const ProfileMap profile = make_profile(scenario.profile, scenario.N0, 0.0, 1.0);
    PopulationData pop = simulate_population(profile, scenario.n0, scenario.T,
                                             derive_seed(run_seed, 0), scenario.workers);
    generate_infections(pop, profile, scenario.target_prevalence, derive_seed(run_seed, 1),
                        scenario.signal_spread);
    return subsample_dataset(pop, scenario.n, scenario.N, scenario.t, derive_seed(run_seed, 2));
}

CoverageStats coverage_eval(const Scenario& scenario, EstimatorKind estimator, int mc_runs,
                            const BootstrapConfig& config) {
    if (mc_runs < 1) throw data_error("coverage_eval: mc_runs must be positive");
    const ProfileMap profile = make_profile(scenario.profile, scenario.N0, 0.0, 1.0);
    const Eigen::VectorXd truth01 =
        minmax_scale01(downsample_map(profile.values, profile.n0, scenario.N));
    const NeighborGraph graph =
        build_neighbor_graph(LatticeSpec::full(scenario.N, scenario.N));
    const DifferenceOperator D = build_difference_operator(graph);

    CoverageStats stats;
    stats.runs = mc_runs;
    for (int run = 0; run < mc_runs; ++run) {
        const Dataset ds = simulate_scenario_dataset(scenario, static_cast<std::uint64_t>(run));
        BootstrapConfig run_cfg = config;
        run_cfg.seed = derive_seed(derive_seed(scenario.seed, static_cast<std::uint64_t>(run)), 3);
        const BootstrapResult boot = bootstrap_fit(ds, D, run_cfg, estimator);

        // Coverage lives on the scaled axis (every estimate min-max scaled
        // to [0,1] before comparison, the Table-1 convention).
        double covered = 0.0, width = 0.0;
        Eigen::Index counted = 0;
        for (Eigen::Index l = 0; l < boot.mu_bc.size(); ++l) {
            if (std::isnan(boot.scaled_lower[l]) || std::isnan(boot.scaled_upper[l]))
                continue;
            const double lb = boot.scaled_lower[l];
            const double ub = boot.scaled_upper[l];
            covered += (truth01[l] >= lb - 1e-12 && truth01[l] <= ub + 1e-12) ? 1.0 : 0.0;
            width += ub - lb;
            ++counted;
        }
        if (counted == 0) throw numeric_error("coverage_eval: no usable cells");
        stats.coverage += covered / static_cast<double>(counted);
        stats.width += width / static_cast<double>(counted);
        stats.mse_bc += scaled_mse(boot.mu_bc, profile, scenario.N);
    }
    stats.coverage /= mc_runs;
    stats.width /= mc_runs;
    stats.mse_bc /= mc_runs;
    return stats;
}

} // namespace tvmap
