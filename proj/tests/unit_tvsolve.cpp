#include <doctest.h>

#include "support/oracles.hpp"
#include "tvmap/errors.hpp"
#include "tvmap/lattice.hpp"
#include "tvmap/model.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/tvsolve.hpp"

#include <cmath>

using namespace tvmap;

namespace {

DifferenceOperator grid_op(int R, int C) {
    return build_difference_operator(build_neighbor_graph(LatticeSpec::full(R, C)));
}

// Every solve in the suite goes through here: certificate bound, certificate
// box constraint, and objective recomputation are checked each time.
TvSolution solve_checked(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const DifferenceOperator& D, double lambda,
                         FitConfig cfg = {}) {
    const TvSolution sol = fit_tv(X, y, D, lambda, cfg);
    CHECK(sol.converged);
    CHECK(sol.dual_residual <= cfg.tol_kkt);
    if (sol.omega.size() > 0)
        CHECK(sol.omega.cwiseAbs().maxCoeff() <= lambda + 1e-12);
    const auto [h, g] = negloglik_and_grad(X, y, sol.mu);
    (void)g;
    const double recomputed = h + lambda * (D.D * sol.mu).cwiseAbs().sum();
    CHECK(sol.objective ==
          doctest::Approx(recomputed).epsilon(1e-8));
    const Eigen::VectorXd kkt = negloglik_and_grad(X, y, sol.mu).second +
                                D.D.transpose() * sol.omega;
    CHECK(kkt.cwiseAbs().maxCoeff() == doctest::Approx(sol.dual_residual).epsilon(1e-9));
    return sol;
}

} // namespace

TEST_CASE("lambda = 0 on a well-conditioned instance recovers the MLE") {
    const auto inst = oracle::random_instance(40, 4, 11);
    const auto D = grid_op(2, 2);
    const TvSolution sol = solve_checked(inst.X, inst.y, D, 0.0);
    const MleResult mle = fit_mle(inst.X, inst.y, 1e-10, 200);
    CHECK((sol.mu - mle.mu).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("lambda >= lambda0 collapses to the constant map at beta0") {
    for (int k = 0; k < 6; ++k) {
        const auto inst = oracle::random_instance(12, 9, 2000 + k);
        const auto D = grid_op(3, 3);
        const LambdaZeroResult lz = lambda_zero(inst.X, inst.y, D);
        for (double factor : {1.0, 1.3, 4.0}) {
            const TvSolution sol = solve_checked(inst.X, inst.y, D, lz.lambda0 * factor);
            CHECK(sol.mu.maxCoeff() - sol.mu.minCoeff() <= 1e-5);
            CHECK(sol.mu[0] == doctest::Approx(lz.beta0).epsilon(1e-6));
        }
    }
}

TEST_CASE("1x2 lattice interior solution matches a brute-force grid search") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1, 0;
    const auto D = grid_op(1, 2);
    const double lambda = 0.25;
    const TvSolution sol = solve_checked(X, y, D, lambda);

    const auto objective = [&](double m0, double m1) {
        return softplus(-m0) + softplus(m1) + lambda * std::abs(m1 - m0);
    };
    const Eigen::Vector2d brute = oracle::brute_force_min_2d(objective, -4.0, 4.0, 400, 3);
    CHECK(sol.mu[0] == doctest::Approx(brute[0]).epsilon(1e-4));
    CHECK(sol.mu[1] == doctest::Approx(brute[1]).epsilon(1e-4));
}

TEST_CASE("penalty is non-increasing and objective non-decreasing in lambda") {
    const auto inst = oracle::random_instance(25, 9, 77);
    const auto D = grid_op(3, 3);
    const double lam0 = lambda_zero(inst.X, inst.y, D).lambda0;
    double prev_penalty = std::numeric_limits<double>::infinity();
    double prev_objective = -std::numeric_limits<double>::infinity();
    for (double f : {0.05, 0.25, 0.5, 0.75, 1.1}) {
        const TvSolution sol = solve_checked(inst.X, inst.y, D, f * lam0);
        const double penalty = (D.D * sol.mu).cwiseAbs().sum();
        CHECK(penalty <= prev_penalty + 1e-6);
        CHECK(sol.objective >= prev_objective - 1e-8);
        prev_penalty = penalty;
        prev_objective = sol.objective;
    }
}

TEST_CASE("just below lambda0 the map splits into a handful of levels") {
    const auto inst = oracle::random_instance(18, 16, 321);
    const auto D = grid_op(4, 4);
    const double lam0 = lambda_zero(inst.X, inst.y, D).lambda0;
    const TvSolution sol = solve_checked(inst.X, inst.y, D, 0.98 * lam0);

    std::vector<double> levels;
    for (Eigen::Index l = 0; l < sol.mu.size(); ++l) {
        bool found = false;
        for (double v : levels) found = found || std::abs(v - sol.mu[l]) < 1e-4;
        if (!found) levels.push_back(sol.mu[l]);
    }
    CHECK(levels.size() >= 2);
    CHECK(levels.size() <= 5);
}

TEST_CASE("all-equal outcomes are rejected") {
    const auto D = grid_op(2, 2);
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 4);
    CHECK_THROWS_AS(fit_tv(X, Eigen::VectorXd::Ones(3), D, 1.0), data_error);
    CHECK_THROWS_AS(fit_tv(X, Eigen::VectorXd::Zero(3), D, 0.5), data_error);
    CHECK_THROWS_AS(fit_tv(X, Eigen::VectorXd::Ones(3), D, -1.0), data_error);
}

TEST_CASE("single-cell lattice reduces to the intercept") {
    Eigen::MatrixXd X(4, 1);
    X << 1, 2, 1, 2;
    Eigen::VectorXd y(4);
    y << 1, 0, 0, 1;
    const auto D = grid_op(1, 1);
    const TvSolution sol = fit_tv(X, y, D, 3.0);
    CHECK(sol.converged);
    CHECK(sol.mu[0] == doctest::Approx(fit_intercept(X, y)).epsilon(1e-10));
}

TEST_CASE("solver matches the zero-threshold boundary from both sides") {
    for (int k = 0; k < 5; ++k) {
        const auto inst = oracle::random_instance(10, 9, 4000 + k);
        const auto D = grid_op(3, 3);
        const double lam0 = lambda_zero(inst.X, inst.y, D).lambda0;

        const TvSolution above = solve_checked(inst.X, inst.y, D, 1.01 * lam0);
        CHECK(above.mu.maxCoeff() - above.mu.minCoeff() <= 1e-5);

        const TvSolution below = solve_checked(inst.X, inst.y, D, 0.90 * lam0);
        CHECK(below.mu.maxCoeff() - below.mu.minCoeff() > 1e-4);
    }
}

TEST_CASE("solutions are deterministic") {
    const auto inst = oracle::random_instance(20, 9, 555);
    const auto D = grid_op(3, 3);
    const double lam0 = lambda_zero(inst.X, inst.y, D).lambda0;
    const TvSolution a = fit_tv(inst.X, inst.y, D, 0.7 * lam0);
    const TvSolution b = fit_tv(inst.X, inst.y, D, 0.7 * lam0);
    CHECK(a.mu == b.mu);
    CHECK(a.omega == b.omega);
    CHECK(a.objective == b.objective);
}
