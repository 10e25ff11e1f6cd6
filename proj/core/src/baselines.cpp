#include "tvmap/baselines.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/model.hpp"
#include "tvmap/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace tvmap {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "tv" || name == "TV") return EstimatorKind::TV;
    if (name == "empirical") return EstimatorKind::Empirical;
    if (name == "gpr" || name == "GPR") return EstimatorKind::GPR;
    throw data_error("unknown estimator '" + name + "' (expected tv, empirical, gpr)");
}

std::string estimator_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::TV: return "TV";
        case EstimatorKind::Empirical: return "empirical";
        case EstimatorKind::GPR: return "GPR";
    }
    return "unknown";
}

Eigen::VectorXd empirical_estimate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size())
        throw data_error("empirical_estimate: X rows and y length differ");
    if (X.minCoeff() < 0.0)
        throw data_error("empirical_estimate: X must be nonnegative");
    validate_binary(y);

    Eigen::VectorXd map(X.cols());
    for (Eigen::Index l = 0; l < X.cols(); ++l) {
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            den += X(i, l);
            if (y[i] == 1.0) num += X(i, l);
        }
        map[l] = (den > 0.0) ? num / den : kNaN;
    }
    return map;
}

Eigen::VectorXd minmax_scale01(const Eigen::VectorXd& v) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < v.size(); ++l) {
        if (std::isnan(v[l])) continue;
        lo = std::min(lo, v[l]);
        hi = std::max(hi, v[l]);
    }
    Eigen::VectorXd out(v.size());
    const double range = hi - lo;
    for (Eigen::Index l = 0; l < v.size(); ++l) {
        if (std::isnan(v[l])) out[l] = kNaN;
        else out[l] = (range > 0.0) ? (v[l] - lo) / range : 0.0;
    }
    return out;
}

namespace detail {

Eigen::VectorXd gp_posterior_mean(const Eigen::MatrixXd& train_xy,
                                  const Eigen::VectorXd& train_t,
                                  const Eigen::MatrixXd& pred_xy, double lengthscale,
                                  double signal_var, double noise_var) {
    const Eigen::Index m = train_xy.rows();
    const double inv2l2 = 1.0 / (2.0 * lengthscale * lengthscale);

    Eigen::MatrixXd K(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double d2 = (train_xy.row(i) - train_xy.row(j)).squaredNorm();
            K(i, j) = K(j, i) = signal_var * std::exp(-d2 * inv2l2);
        }
        K(i, i) += noise_var;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw numeric_error("gp_posterior_mean: kernel matrix not positive definite");
    const Eigen::VectorXd alpha = llt.solve(train_t);

    Eigen::VectorXd pred(pred_xy.rows());
    Eigen::VectorXd kstar(m);
    for (Eigen::Index s = 0; s < pred_xy.rows(); ++s) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d2 = (pred_xy.row(s) - train_xy.row(i)).squaredNorm();
            kstar[i] = signal_var * std::exp(-d2 * inv2l2);
        }
        pred[s] = kstar.dot(alpha);
    }
    return pred;
}

} // namespace detail

Eigen::VectorXd gpr_logodds(const Eigen::VectorXd& empirical_map, const NeighborGraph& graph,
                            int cv_folds, std::uint64_t seed) {
    if (empirical_map.size() != graph.p())
        throw data_error("gpr_logodds: map length does not match the lattice");
    if (cv_folds < 2) throw data_error("gpr_logodds: need at least 2 CV folds");

    std::vector<int> visited;
    for (Eigen::Index l = 0; l < empirical_map.size(); ++l)
        if (!std::isnan(empirical_map[l])) visited.push_back(static_cast<int>(l));
    if (visited.empty())
        throw data_error("gpr_logodds: empirical map has no visited cells");

    // Constant maps interpolate to themselves; nothing to fit.
    {
        double lo = empirical_map[visited.front()], hi = lo;
        for (int l : visited) {
            lo = std::min(lo, empirical_map[l]);
            hi = std::max(hi, empirical_map[l]);
        }
        if (hi - lo < 1e-12)
            return Eigen::VectorXd::Constant(graph.p(), empirical_map[visited.front()]);
    }
    if (static_cast<int>(visited.size()) < 10)
        throw data_error("gpr_logodds: need at least 10 visited cells, got " +
                         std::to_string(visited.size()));

    const double delta = 0.01; // log-odds of 0/1 cells are undefined
    Eigen::VectorXd t(static_cast<Eigen::Index>(visited.size()));
    Eigen::MatrixXd xy(static_cast<Eigen::Index>(visited.size()), 2);
    for (std::size_t k = 0; k < visited.size(); ++k) {
        const double e = std::clamp(empirical_map[visited[k]], delta, 1.0 - delta);
        t[static_cast<Eigen::Index>(k)] = std::log(e / (1.0 - e));
        const auto [r, c] = graph.cells[static_cast<std::size_t>(visited[k])];
        xy(static_cast<Eigen::Index>(k), 0) = r + 0.5;
        xy(static_cast<Eigen::Index>(k), 1) = c + 0.5;
    }

    const double var_t = std::max((t.array() - t.mean()).square().mean(), 1e-6);
    const double span = 0.5 * std::max(graph.n_rows, graph.n_cols);
    std::vector<double> lengthscales;
    for (int k = 0; k < 4; ++k)
        lengthscales.push_back(1.5 * std::pow(span / 1.5, k / 3.0));
    const double signal_mult[] = {0.25, 1.0, 4.0};
    const double noise_mult[] = {1e-3, 1e-2, 1e-1};

    // Deterministic fold assignment from the seed.
    std::vector<int> order(visited.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, 0x69f0ULL));
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const auto j = k + rng.below(order.size() - k);
        std::swap(order[k], order[j]);
    }
    std::vector<int> fold_of(visited.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        fold_of[static_cast<std::size_t>(order[k])] = static_cast<int>(k % cv_folds);

    double best_err = std::numeric_limits<double>::infinity();
    double best_ell = lengthscales[0], best_sf = var_t, best_sn = 1e-2 * var_t;
    for (double ell : lengthscales) {
        for (double sm : signal_mult) {
            for (double nm : noise_mult) {
                const double sf = sm * var_t, sn = nm * var_t;
                double err = 0.0;
                for (int f = 0; f < cv_folds; ++f) {
                    std::vector<int> tr, va;
                    for (std::size_t k = 0; k < visited.size(); ++k)
                        (fold_of[k] == f ? va : tr).push_back(static_cast<int>(k));
                    if (tr.empty() || va.empty()) continue;
                    Eigen::MatrixXd xy_tr(static_cast<Eigen::Index>(tr.size()), 2);
                    Eigen::VectorXd t_tr(static_cast<Eigen::Index>(tr.size()));
                    for (std::size_t k = 0; k < tr.size(); ++k) {
                        xy_tr.row(static_cast<Eigen::Index>(k)) = xy.row(tr[k]);
                        t_tr[static_cast<Eigen::Index>(k)] = t[tr[k]];
                    }
                    Eigen::MatrixXd xy_va(static_cast<Eigen::Index>(va.size()), 2);
                    for (std::size_t k = 0; k < va.size(); ++k)
                        xy_va.row(static_cast<Eigen::Index>(k)) = xy.row(va[k]);
                    const Eigen::VectorXd pred =
                        detail::gp_posterior_mean(xy_tr, t_tr, xy_va, ell, sf, sn);
                    for (std::size_t k = 0; k < va.size(); ++k) {
                        const double diff = pred[static_cast<Eigen::Index>(k)] - t[va[k]];
                        err += diff * diff;
                    }
                }
                if (err < best_err) {
                    best_err = err;
                    best_ell = ell;
                    best_sf = sf;
                    best_sn = sn;
                }
            }
        }
    }

    Eigen::MatrixXd xy_all(graph.p(), 2);
    for (int l = 0; l < graph.p(); ++l) {
        const auto [r, c] = graph.cells[static_cast<std::size_t>(l)];
        xy_all(l, 0) = r + 0.5;
        xy_all(l, 1) = c + 0.5;
    }
    const Eigen::VectorXd pred =
        detail::gp_posterior_mean(xy, t, xy_all, best_ell, best_sf, best_sn);

    Eigen::VectorXd out(graph.p());
    for (int l = 0; l < graph.p(); ++l) out[l] = sigmoid(pred[l]);
    return out;
}

double scaled_mse(const Eigen::VectorXd& estimate, const ProfileMap& truth, int N) {
    if (estimate.size() != static_cast<Eigen::Index>(N) * N)
        throw data_error("scaled_mse: estimate length does not match the N grid");

    const Eigen::VectorXd est01 = minmax_scale01(estimate);
    const Eigen::VectorXd truth_coarse = downsample_map(truth.values, truth.n0, N);
    const Eigen::VectorXd truth01 = minmax_scale01(truth_coarse);

    double sum = 0.0;
    Eigen::Index count = 0;
    for (Eigen::Index l = 0; l < est01.size(); ++l) {
        if (std::isnan(est01[l])) continue;
        const double diff = est01[l] - truth01[l];
        sum += diff * diff;
        ++count;
    }
    if (count == 0) throw data_error("scaled_mse: estimate has no finite cells");
    return sum / static_cast<double>(count);
}

} // namespace tvmap
