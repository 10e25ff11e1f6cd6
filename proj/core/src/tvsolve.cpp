#include "tvmap/tvsolve.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/flow.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace tvmap {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& mu) {
    const Eigen::VectorXd eta = X * mu;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = sigmoid(eta[i]) - y[i];
    return X.transpose() * resid;
}

double objective_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const DifferenceOperator& D, double lambda,
                       const Eigen::VectorXd& mu) {
    double penalty = 0.0;
    for (const auto& [a, b] : D.pairs) penalty += std::abs(mu[b] - mu[a]);
    return negloglik(X, y, mu) + lambda * penalty;
}

struct Candidate {
    Eigen::VectorXd mu;
    Eigen::VectorXd omega;
    double objective = kInf;
    double residual = kInf;
};

void consider(Candidate& best, const Candidate& other) {
    if (other.objective < best.objective ||
        (other.objective == best.objective && other.residual < best.residual))
        best = other;
}

// ---------------------------------------------------------------------------
// Fused-pattern refinement. Groups are the connected components of the
// lattice under the currently fused edges. The restricted problem
//   min_nu h(X_G nu; y) + lambda * sum_boundary s_r (nu_b - nu_a)
// is smooth while boundary signs hold, so Newton solves it to high
// precision; groups merge when a boundary difference collapses and split
// along a max-flow min-cut when the interior certificate is infeasible.
// ---------------------------------------------------------------------------
class PatternSolver {
public:
    PatternSolver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const DifferenceOperator& D, double lambda, double grad_scale)
        : X_(X), y_(y), D_(D), lambda_(lambda),
          p_(static_cast<int>(X.cols())), q_(D.q),
          newton_tol_(std::max(1e-11 * std::max(grad_scale, 1.0), 1e-13)) {}

    // Runs merge/split rounds starting from the given pattern. Returns the
    // best candidate found; candidate.residual is exact and recomputed.
    Candidate run(std::vector<char> fused, const Eigen::VectorXd& mu_init, double tol_kkt,
                  int max_rounds) {
        Candidate best;
        Eigen::VectorXd mu = mu_init;
        for (int round = 0; round < max_rounds; ++round) {
            build_groups(fused);
            merge_zero_dwell_groups(fused);
            Eigen::VectorXd nu = group_means(mu);
            if (!newton(nu)) break;

            // Fuse boundaries whose difference collapsed, then re-solve.
            const double merge_tol = 1e-9 * std::max(1.0, nu.cwiseAbs().maxCoeff());
            bool merged = false;
            for (int r = 0; r < q_; ++r) {
                if (fused[r]) continue;
                const auto& [a, b] = D_.pairs[r];
                if (std::abs(nu[group_[b]] - nu[group_[a]]) <= merge_tol) {
                    fused[r] = 1;
                    merged = true;
                }
            }
            mu = expand(nu);
            if (merged) continue;

            // Certificate: boundary edges carry lambda * sign(diff); the
            // remaining gradient must route through fused edges within
            // capacity lambda.
            Candidate cand = certify(fused, mu);
            consider(best, cand);
            if (cand.residual <= tol_kkt) break;

            // Split along the min-cut of the failed routing, if any.
            if (!split(fused)) break;
        }
        return best;
    }

private:
    void build_groups(const std::vector<char>& fused) {
        parent_.resize(p_);
        std::iota(parent_.begin(), parent_.end(), 0);
        for (int r = 0; r < q_; ++r)
            if (fused[r]) unite(D_.pairs[r].first, D_.pairs[r].second);
        group_.assign(p_, -1);
        n_groups_ = 0;
        for (int l = 0; l < p_; ++l) {
            const int root = find(l);
            if (group_[root] < 0) group_[root] = n_groups_++;
            group_[l] = group_[root];
        }
    }

    int find(int a) {
        while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

    // A group whose cells carry no dwell time at all has a singular reduced
    // Hessian and a constant penalty gradient; fuse it into the neighbor it
    // shares the most boundary edges with.
    void merge_zero_dwell_groups(std::vector<char>& fused) {
        for (;;) {
            Eigen::VectorXd dwell = Eigen::VectorXd::Zero(n_groups_);
            const Eigen::VectorXd col_totals = X_.colwise().sum();
            for (int l = 0; l < p_; ++l) dwell[group_[l]] += col_totals[l];
            int dead = -1;
            for (int g = 0; g < n_groups_; ++g)
                if (dwell[g] <= 0.0) { dead = g; break; }
            if (dead < 0) return;

            std::vector<int> shared(n_groups_, 0);
            for (int r = 0; r < q_; ++r) {
                if (fused[r]) continue;
                const auto& [a, b] = D_.pairs[r];
                if (group_[a] == dead && group_[b] != dead) ++shared[group_[b]];
                if (group_[b] == dead && group_[a] != dead) ++shared[group_[a]];
            }
            const int target =
                static_cast<int>(std::max_element(shared.begin(), shared.end()) -
                                 shared.begin());
            if (shared[target] == 0)
                throw numeric_error("fit_tv: isolated zero-dwell group");
            for (int r = 0; r < q_; ++r) {
                if (fused[r]) continue;
                const auto& [a, b] = D_.pairs[r];
                if ((group_[a] == dead && group_[b] == target) ||
                    (group_[b] == dead && group_[a] == target))
                    fused[r] = 1;
            }
            build_groups(fused);
        }
    }

    Eigen::VectorXd group_means(const Eigen::VectorXd& mu) const {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_groups_);
        Eigen::VectorXd count = Eigen::VectorXd::Zero(n_groups_);
        for (int l = 0; l < p_; ++l) {
            sum[group_[l]] += mu[l];
            count[group_[l]] += 1.0;
        }
        return sum.cwiseQuotient(count);
    }

    Eigen::VectorXd expand(const Eigen::VectorXd& nu) const {
        Eigen::VectorXd mu(p_);
        for (int l = 0; l < p_; ++l) mu[l] = nu[group_[l]];
        return mu;
    }

    double reduced_objective(const Eigen::VectorXd& nu) const {
        const Eigen::VectorXd eta = Xg_ * nu;
        double h = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            h += (y_[i] == 1.0) ? softplus(-eta[i]) : softplus(eta[i]);
        double penalty = 0.0;
        for (int r = 0; r < q_; ++r) {
            const auto& [a, b] = D_.pairs[r];
            if (group_[a] != group_[b]) penalty += std::abs(nu[group_[b]] - nu[group_[a]]);
        }
        return h + lambda_ * penalty;
    }

    bool newton(Eigen::VectorXd& nu) {
        Xg_ = Eigen::MatrixXd::Zero(X_.rows(), n_groups_);
        for (int l = 0; l < p_; ++l) Xg_.col(group_[l]) += X_.col(l);

        double value = reduced_objective(nu);
        for (int iter = 0; iter < 120; ++iter) {
            const Eigen::VectorXd eta = Xg_ * nu;
            Eigen::VectorXd resid(eta.size()), weight(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i) {
                const double s = sigmoid(eta[i]);
                resid[i] = s - y_[i];
                weight[i] = s * (1.0 - s);
            }
            Eigen::VectorXd grad = Xg_.transpose() * resid;
            for (int r = 0; r < q_; ++r) {
                const auto& [a, b] = D_.pairs[r];
                const int ga = group_[a], gb = group_[b];
                if (ga == gb) continue;
                const double s = (nu[gb] > nu[ga]) ? 1.0 : (nu[gb] < nu[ga] ? -1.0 : 0.0);
                grad[gb] += lambda_ * s;
                grad[ga] -= lambda_ * s;
            }
            if (grad.cwiseAbs().maxCoeff() <= newton_tol_) return true;

            Eigen::MatrixXd H = Xg_.transpose() * weight.asDiagonal() * Xg_;
            double damping = 0.0;
            Eigen::VectorXd step;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Eigen::MatrixXd Hd = H;
                if (damping > 0.0)
                    Hd.diagonal().array() += damping;
                Eigen::LLT<Eigen::MatrixXd> llt(Hd);
                if (llt.info() == Eigen::Success) {
                    step = -llt.solve(grad);
                    if (step.allFinite()) break;
                }
                damping = (damping == 0.0) ? 1e-8 * (1.0 + H.trace() / n_groups_)
                                           : damping * 100.0;
                step.resize(0);
            }
            if (step.size() == 0) return false;

            const double slope = grad.dot(step);
            double t = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                const double trial = reduced_objective(nu + t * step);
                if (trial <= value + 0.25 * t * std::min(slope, 0.0) ||
                    (slope >= 0.0 && trial < value)) {
                    nu += t * step;
                    value = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) return true; // at numerical floor; gradient check decides
        }
        return true;
    }

    Candidate certify(const std::vector<char>& fused, const Eigen::VectorXd& mu) {
        Candidate cand;
        cand.mu = mu;
        cand.omega = Eigen::VectorXd::Zero(q_);

        Eigen::VectorXd grad = gradient(X_, y_, mu);
        Eigen::VectorXd supply = -grad;
        for (int r = 0; r < q_; ++r) {
            if (fused[r]) continue;
            const auto& [a, b] = D_.pairs[r];
            const double diff = mu[b] - mu[a];
            const double w = lambda_ * (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0));
            cand.omega[r] = w;
            supply[b] -= w;
            supply[a] += w;
        }

        fused_edges_.clear();
        fused_index_.clear();
        for (int r = 0; r < q_; ++r) {
            if (!fused[r]) continue;
            fused_edges_.push_back(D_.pairs[r]);
            fused_index_.push_back(r);
        }
        last_route_ = detail::route_with_capacity(p_, fused_edges_, supply, lambda_);
        for (std::size_t k = 0; k < fused_index_.size(); ++k)
            cand.omega[fused_index_[k]] = last_route_.edge_flow[static_cast<Eigen::Index>(k)];

        // Exact residual of the assembled certificate.
        Eigen::VectorXd kkt = grad;
        for (int r = 0; r < q_; ++r) {
            const auto& [a, b] = D_.pairs[r];
            kkt[b] += cand.omega[r];
            kkt[a] -= cand.omega[r];
        }
        cand.residual = kkt.cwiseAbs().maxCoeff();
        cand.objective = objective_value(X_, y_, D_, lambda_, mu);
        return cand;
    }

    bool split(std::vector<char>& fused) {
        bool changed = false;
        for (std::size_t k = 0; k < fused_edges_.size(); ++k) {
            const auto& [a, b] = fused_edges_[k];
            if (last_route_.cut_side[a] != last_route_.cut_side[b]) {
                fused[fused_index_[k]] = 0;
                changed = true;
            }
        }
        return changed;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    const DifferenceOperator& D_;
    const double lambda_;
    const int p_;
    const int q_;
    const double newton_tol_;

    std::vector<int> parent_;
    std::vector<int> group_;
    int n_groups_ = 0;
    Eigen::MatrixXd Xg_;
    std::vector<std::pair<int, int>> fused_edges_;
    std::vector<int> fused_index_;
    detail::RouteResult last_route_;
};

TvSolution unpenalized_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           const DifferenceOperator& D, const FitConfig& config) {
    const MleResult mle = fit_mle(X, y, config.tol_kkt, std::min(config.max_iter, 500));
    TvSolution sol;
    sol.mu = mle.mu;
    sol.omega = Eigen::VectorXd::Zero(D.q);
    sol.lambda = 0.0;
    sol.objective = negloglik(X, y, mle.mu);
    sol.dual_residual = mle.grad_inf;
    sol.iterations = mle.iterations;
    sol.converged = mle.converged;
    return sol;
}

} // namespace

TvSolution fit_tv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  const DifferenceOperator& D, double lambda, const FitConfig& config) {
    if (lambda < 0.0) throw data_error("fit_tv: lambda must be nonnegative");
    if (X.rows() != y.size()) throw data_error("fit_tv: X rows and y length differ");
    if (X.cols() != D.p) throw data_error("fit_tv: X cols and difference operator disagree");
    if (!X.allFinite()) throw data_error("fit_tv: non-finite entries in X");
    validate_binary(y);
    if (!has_both_classes(y))
        throw data_error("fit_tv: y is all zeros or all ones (no finite minimizer)");

    const int p = static_cast<int>(X.cols());
    const int q = D.q;

    if (lambda == 0.0 || q == 0) {
        if (q == 0 && p > 1)
            throw data_error("fit_tv: difference operator has no rows on a multi-cell lattice");
        if (q == 0) {
            // Single-cell lattice: the fit is the intercept itself.
            const double b0 = fit_intercept(X, y);
            TvSolution sol;
            sol.mu = Eigen::VectorXd::Constant(1, b0);
            sol.omega = Eigen::VectorXd(0);
            sol.lambda = lambda;
            sol.objective = negloglik(X, y, sol.mu);
            sol.dual_residual = gradient(X, y, sol.mu).cwiseAbs().maxCoeff();
            sol.iterations = 1;
            sol.converged = sol.dual_residual <= config.tol_kkt;
            return sol;
        }
        return unpenalized_mle(X, y, D, config);
    }

    const double beta0 = fit_intercept(X, y);
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(p, beta0);
    const double grad_scale =
        std::max(1.0, gradient(X, y, mu).cwiseAbs().maxCoeff() + 4.0 * lambda);

    PatternSolver pattern(X, y, D, lambda, grad_scale);
    Candidate best;
    int iterations = 0;

    // Pattern refinement from the constant map solves most instances
    // outright (and is exact for lambda >= lambda0).
    {
        Candidate cand = pattern.run(std::vector<char>(q, 1), mu, config.tol_kkt, 60);
        consider(best, cand);
        if (best.residual <= config.tol_kkt) {
            TvSolution sol;
            sol.mu = best.mu;
            sol.omega = best.omega;
            sol.lambda = lambda;
            sol.objective = best.objective;
            sol.dual_residual = best.residual;
            sol.iterations = 1;
            sol.converged = true;
            return sol;
        }
    }

    // ADMM fallback: split z = D mu, with the likelihood step majorized by
    // the logistic curvature bound (1/4) X^T X so the factorization is reused.
    const Eigen::MatrixXd XtX = X.transpose() * X;
    Eigen::SparseMatrix<double> Dt = D.D.transpose();
    const Eigen::MatrixXd DtD = (Dt * D.D).toDense();

    double rho = std::max(lambda, 1e-8 * grad_scale);
    auto factorize = [&](double r) {
        Eigen::MatrixXd A = 0.25 * XtX + r * DtD;
        return Eigen::LLT<Eigen::MatrixXd>(A);
    };
    Eigen::LLT<Eigen::MatrixXd> llt = factorize(rho);

    Eigen::VectorXd z = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd z_prev = z;
    std::vector<char> pattern_prev(q, 2);
    int rho_changes = 0;
    int stable_checks = 0;

    const int check_every = 25;
    for (int iter = 1; iter <= config.max_iter; ++iter) {
        iterations = iter;
        for (int inner = 0; inner < 2; ++inner) {
            const Eigen::VectorXd g = gradient(X, y, mu);
            const Eigen::VectorXd rhs = 0.25 * (XtX * mu) - g + rho * (Dt * (z - w));
            mu = llt.solve(rhs);
        }
        const Eigen::VectorXd Dmu = D.D * mu;
        z_prev.swap(z);
        const double thresh = lambda / rho;
        z = Dmu + w;
        for (int r = 0; r < q; ++r) {
            const double v = z[r];
            z[r] = (v > thresh) ? v - thresh : (v < -thresh ? v + thresh : 0.0);
        }
        w += Dmu - z;

        if (iter % check_every != 0 && iter != config.max_iter) continue;

        const Eigen::VectorXd g = gradient(X, y, mu);
        Eigen::VectorXd omega = (rho * w).cwiseMax(-lambda).cwiseMin(lambda);
        Candidate admm_cand;
        admm_cand.mu = mu;
        admm_cand.omega = omega;
        admm_cand.residual = (g + Dt * omega).cwiseAbs().maxCoeff();
        admm_cand.objective = objective_value(X, y, D, lambda, mu);
        consider(best, admm_cand);

        const double r_primal = (Dmu - z).cwiseAbs().maxCoeff();
        if (admm_cand.residual <= config.tol_kkt &&
            r_primal <= config.tol * std::max(1.0, Dmu.cwiseAbs().maxCoeff()))
            break;

        std::vector<char> pat(q);
        for (int r = 0; r < q; ++r) pat[r] = (z[r] == 0.0);
        const bool same = (pat == pattern_prev);
        pattern_prev = pat;
        stable_checks = same ? stable_checks + 1 : 0;
        if (stable_checks >= 2 || iter % (check_every * 10) == 0) {
            Candidate cand = pattern.run(pat, mu, config.tol_kkt, 60);
            consider(best, cand);
            if (best.residual <= config.tol_kkt) break;
            stable_checks = 0;
        }

        // Residual balancing; the dual residual proxy uses the z change.
        if (rho_changes < 12 && iter % (check_every * 2) == 0) {
            const double r_dual = rho * (Dt * (z - z_prev)).cwiseAbs().maxCoeff();
            if (r_primal > 10.0 * r_dual && r_dual > 0.0) {
                rho *= 2.0;
                w *= 0.5;
                llt = factorize(rho);
                ++rho_changes;
            } else if (r_dual > 10.0 * r_primal && r_primal > 0.0) {
                rho *= 0.5;
                w *= 2.0;
                llt = factorize(rho);
                ++rho_changes;
            }
        }
    }

    TvSolution sol;
    sol.mu = best.mu;
    sol.omega = best.omega;
    sol.lambda = lambda;
    sol.objective = best.objective;
    sol.dual_residual = best.residual;
    sol.iterations = iterations;
    sol.converged = best.residual <= config.tol_kkt;
    return sol;
}

} // namespace tvmap
