#include <doctest.h>

#include "support/lp_oracle.hpp"
#include "support/oracles.hpp"
#include "tvmap/errors.hpp"
#include "tvmap/lattice.hpp"
#include "tvmap/model.hpp"
#include "tvmap/qut.hpp"
#include "tvmap/tvsolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace tvmap;

namespace {

DifferenceOperator grid_op(int R, int C) {
    return build_difference_operator(build_neighbor_graph(LatticeSpec::full(R, C)));
}

} // namespace

TEST_CASE("1x2 lattice closed form: beta0 = 0, u = (0.5, -0.5), lambda0 = 0.5") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1, 0;
    const auto D = grid_op(1, 2);
    const LambdaZeroResult lz = lambda_zero(X, y, D);
    CHECK(lz.beta0 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(lz.lambda0 == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(lz.feasibility_residual <= 1e-8);
    CHECK(lz.omega.cwiseAbs().maxCoeff() == doctest::Approx(lz.lambda0).epsilon(1e-12));

    const auto lp = oracle::lambda_zero_simplex(D.D.toDense(), Eigen::Vector2d(0.5, -0.5));
    CHECK(lp.lambda0 == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("synthetic outcomes equal to the fitted probabilities give lambda0 = 0") {
    Eigen::MatrixXd X(3, 4);
    X << 1, 2, 0.5, 1, 2, 0.25, 1, 1, 0.75, 3, 1, 0.5;
    const auto D = grid_op(2, 2);
    const double b0 = 0.3;
    Eigen::VectorXd y(3);
    const Eigen::VectorXd s = X.rowwise().sum();
    for (int i = 0; i < 3; ++i) y[i] = sigmoid(b0 * s[i]);
    const LambdaZeroResult lz = lambda_zero(X, y, D);
    CHECK(lz.lambda0 <= 1e-9);
    CHECK(lz.omega.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("flow solver agrees with the dense simplex oracle on random instances") {
    for (int k = 0; k < 25; ++k) {
        const int R = 2 + k % 3, C = 2 + (k / 3) % 2;
        const auto inst = oracle::random_instance(6 + k % 7, R * C, 6000 + k);
        const auto D = grid_op(R, C);
        const LambdaZeroResult lz = lambda_zero(inst.X, inst.y, D);

        const Eigen::VectorXd s = inst.X.rowwise().sum();
        Eigen::VectorXd resid(inst.y.size());
        for (Eigen::Index i = 0; i < inst.y.size(); ++i)
            resid[i] = inst.y[i] - sigmoid(lz.beta0 * s[i]);
        const Eigen::VectorXd u = inst.X.transpose() * resid;

        const auto lp = oracle::lambda_zero_simplex(D.D.toDense(), u);
        CHECK(lz.lambda0 == doctest::Approx(lp.lambda0).epsilon(1e-7));

        // invariants of the result itself
        CHECK(lz.lambda0 == doctest::Approx(lz.omega.cwiseAbs().maxCoeff()).epsilon(1e-12));
        CHECK((D.D.transpose() * lz.omega - u).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("score balance 1.u = 0 holds at beta0") {
    for (int k = 0; k < 10; ++k) {
        const auto inst = oracle::random_instance(15, 9, 7000 + k, 4.0);
        const double b0 = fit_intercept(inst.X, inst.y);
        const Eigen::VectorXd s = inst.X.rowwise().sum();
        Eigen::VectorXd resid(inst.y.size());
        for (Eigen::Index i = 0; i < inst.y.size(); ++i)
            resid[i] = inst.y[i] - sigmoid(b0 * s[i]);
        const Eigen::VectorXd u = inst.X.transpose() * resid;
        CHECK(std::abs(u.sum()) < 1e-8);
    }
}

TEST_CASE("lambda0 is invariant to consistent cell relabeling") {
    const auto inst = oracle::random_instance(12, 9, 99);
    const auto D = grid_op(3, 3);
    const double base = lambda_zero(inst.X, inst.y, D).lambda0;

    // Relabel cells by reversing ids; permute X columns and D columns alike.
    const int p = 9;
    Eigen::MatrixXd Xp(inst.X.rows(), p);
    for (int l = 0; l < p; ++l) Xp.col(l) = inst.X.col(p - 1 - l);
    DifferenceOperator Dp = D;
    for (auto& [a, b] : Dp.pairs) {
        a = p - 1 - a;
        b = p - 1 - b;
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < Dp.q; ++r) {
        trip.emplace_back(r, Dp.pairs[r].first, -1.0);
        trip.emplace_back(r, Dp.pairs[r].second, 1.0);
    }
    Dp.D.setZero();
    Dp.D.setFromTriplets(trip.begin(), trip.end());
    const double relabeled = lambda_zero(Xp, inst.y, Dp).lambda0;
    CHECK(relabeled == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("lambda0 from the LP equals the solver's constancy breakpoint") {
    for (int k = 0; k < 5; ++k) {
        const auto inst = oracle::random_instance(9, 9, 8000 + k);
        const auto D = grid_op(3, 3);
        const double lam0 = lambda_zero(inst.X, inst.y, D).lambda0;

        double lo = 0.0, hi = 2.0 * lam0 + 1e-3;
        const auto constant_at = [&](double lam) {
            const TvSolution sol = fit_tv(inst.X, inst.y, D, lam);
            return sol.mu.maxCoeff() - sol.mu.minCoeff() <= 1e-5;
        };
        REQUIRE(constant_at(hi));
        for (int it = 0; it < 40 && (hi - lo) > 5e-4 * lam0; ++it) {
            const double mid = 0.5 * (lo + hi);
            (constant_at(mid) ? hi : lo) = mid;
        }
        CHECK(hi == doctest::Approx(lam0).epsilon(2e-3));
    }
}

TEST_CASE("qut quantile convention and determinism") {
    const auto inst = oracle::random_instance(20, 4, 1234, 1.0);
    const auto D = grid_op(2, 2);
    const double b0 = fit_intercept(inst.X, inst.y);

    const QutResult a = qut_estimate(inst.X, D, 0.05, 100, 9090, b0);
    const QutResult b = qut_estimate(inst.X, D, 0.05, 100, 9090, b0);
    CHECK(a.lambda_qut == b.lambda_qut);
    CHECK(a.samples == b.samples);
    CHECK(a.discards == b.discards);

    // threshold = 95th smallest of 100 sorted samples
    CHECK(std::is_sorted(a.samples.begin(), a.samples.end()));
    CHECK(a.lambda_qut == a.samples[94]);

    const QutResult c = qut_estimate(inst.X, D, 0.05, 100, 9090, b0, 3);
    CHECK(c.samples == a.samples); // worker count must not matter
}

TEST_CASE("qut rejects bad arguments and extreme beta0") {
    const auto inst = oracle::random_instance(10, 4, 777);
    const auto D = grid_op(2, 2);
    CHECK_THROWS_AS(qut_estimate(inst.X, D, 0.05, 10, 1, 0.0), data_error);
    CHECK_THROWS_AS(qut_estimate(inst.X, D, 0.0, 100, 1, 0.0), data_error);
    // beta0 so extreme every draw is all-ones
    CHECK_THROWS_AS(qut_estimate(inst.X, D, 0.05, 50, 1, 50.0), data_error);
}

TEST_CASE("upper_quantile_order_stat") {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = i + 1.0;
    CHECK(upper_quantile_order_stat(v, 0.05) == 95.0);
    CHECK(upper_quantile_order_stat(v, 0.5) == 50.0);
    CHECK(upper_quantile_order_stat(v, 0.999) == 1.0);
}

TEST_CASE("tv_test compares the statistic to the threshold") {
    const auto inst = oracle::random_instance(25, 9, 3141, 1.0);
    const auto D = grid_op(3, 3);
    const TestReport report = tv_test(inst.X, inst.y, D, 0.05, 60, 17);
    CHECK(report.method == TestMethod::TV);
    CHECK(report.statistic == doctest::Approx(lambda_zero(inst.X, inst.y, D).lambda0));
    CHECK(report.reject == (report.statistic >= report.threshold));

    Eigen::VectorXd degenerate = Eigen::VectorXd::Ones(25);
    CHECK_THROWS_AS(tv_test(inst.X, degenerate, D, 0.05, 60, 17), data_error);
}

TEST_CASE("lrt: statistic nonnegative, chi2 threshold, n < p rejected") {
    const auto inst = oracle::random_instance(40, 4, 2718);
    const auto D = grid_op(2, 2);
    (void)D;
    const TestReport chi2 = lrt(inst.X, inst.y, LrtMode::chi2, 0.05, 0, 5);
    CHECK(chi2.statistic >= 0.0);
    CHECK(chi2.method == TestMethod::LRT_chi2);
    CHECK(chi2.threshold == doctest::Approx(7.814727903).epsilon(1e-6)); // chi2_3, 0.95

    const TestReport exact = lrt(inst.X, inst.y, LrtMode::exact, 0.05, 60, 5);
    CHECK(exact.method == TestMethod::LRT_exact);
    CHECK(exact.statistic == doctest::Approx(chi2.statistic).epsilon(1e-12));
    CHECK(exact.threshold > 0.0);

    Eigen::MatrixXd wide = Eigen::MatrixXd::Random(3, 9).cwiseAbs();
    Eigen::VectorXd y3(3);
    y3 << 1, 0, 1;
    CHECK_THROWS_WITH_AS(lrt(wide, y3, LrtMode::chi2, 0.05, 0, 5),
                         doctest::Contains("tv_test"), data_error);
}
