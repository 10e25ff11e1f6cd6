#include <doctest.h>

#include "support/oracles.hpp"
#include "tvmap/errors.hpp"
#include "tvmap/model.hpp"

#include <cmath>

using namespace tvmap;

TEST_CASE("negloglik at mu = 0 is n log 2 with gradient X^T (1/2 - y)") {
    const auto inst = oracle::random_instance(12, 5, 101);
    const Eigen::VectorXd mu = Eigen::VectorXd::Zero(5);
    const auto [h, g] = negloglik_and_grad(inst.X, inst.y, mu);
    CHECK(h == doctest::Approx(12 * std::log(2.0)).epsilon(1e-14));
    const Eigen::VectorXd expect =
        inst.X.transpose() * (Eigen::VectorXd::Constant(12, 0.5) - inst.y);
    CHECK((g - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scalar evaluation: x=(1,0), y=1, mu=(10,0)") {
    Eigen::MatrixXd X(1, 2);
    X << 1, 0;
    Eigen::VectorXd y(1), mu(2);
    y << 1;
    mu << 10, 0;
    const auto [h, g] = negloglik_and_grad(X, y, mu);
    CHECK(h == doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-12));
    CHECK(h == doctest::Approx(4.5398899216870535e-5).epsilon(1e-9));
    (void)g;
}

TEST_CASE("gradient matches central finite differences on 20 random instances") {
    for (int k = 0; k < 20; ++k) {
        const auto inst = oracle::random_instance(8 + k % 5, 3 + k % 4, 200 + k, 1.5);
        Eigen::VectorXd mu(inst.X.cols());
        std::mt19937 gen(300 + k);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (Eigen::Index j = 0; j < mu.size(); ++j) mu[j] = unif(gen);

        const auto [h, g] = negloglik_and_grad(inst.X, inst.y, mu);
        (void)h;
        const Eigen::VectorXd fd = oracle::finite_diff_gradient(
            [&](const Eigen::VectorXd& m) { return negloglik(inst.X, inst.y, m); }, mu);
        const double rel = (g - fd).norm() / std::max(1.0, g.norm());
        CHECK(rel < 1e-6);
    }
}

TEST_CASE("negloglik rejects non-finite input and stays finite at large eta") {
    Eigen::MatrixXd X(2, 2);
    X << 1, 0, 0, 1;
    Eigen::VectorXd y(2), mu(2);
    y << 1, 0;
    mu << std::nan(""), 0.0;
    CHECK_THROWS_AS(negloglik_and_grad(X, y, mu), data_error);

    mu << 700.0, -700.0;
    const auto [h, g] = negloglik_and_grad(X, y, mu);
    CHECK(std::isfinite(h));
    CHECK(g.allFinite());
}

TEST_CASE("h is convex along random chords") {
    const auto inst = oracle::random_instance(15, 6, 42);
    std::mt19937 gen(43);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int k = 0; k < 25; ++k) {
        Eigen::VectorXd m1(6), m2(6);
        for (int j = 0; j < 6; ++j) {
            m1[j] = unif(gen);
            m2[j] = unif(gen);
        }
        const double lhs = negloglik(inst.X, inst.y, 0.5 * (m1 + m2));
        const double rhs =
            0.5 * negloglik(inst.X, inst.y, m1) + 0.5 * negloglik(inst.X, inst.y, m2);
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("fit_intercept closed forms") {
    // Equal row sums s: beta0 = logit(mean y) / s; balanced y with s = 1 gives 0.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 2);
    X.col(0).setConstant(0.25);
    X.col(1).setConstant(0.75); // row sums 1
    Eigen::VectorXd y(4);
    y << 1, 0, 1, 0;
    CHECK(fit_intercept(X, y) == doctest::Approx(0.0).epsilon(1e-12));

    y << 1, 1, 1, 0;
    const double beta = fit_intercept(X, y);
    CHECK(beta == doctest::Approx(std::log(3.0)).epsilon(1e-9)); // logit(0.75)/1

    Eigen::MatrixXd X2(2, 2);
    X2 << 0.5, 0.5, 1.0, 0.0; // row sums both 1
    Eigen::VectorXd y2(2);
    y2 << 1, 0;
    CHECK(fit_intercept(X2, y2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fit_intercept agrees with golden-section search") {
    for (int k = 0; k < 8; ++k) {
        const auto inst = oracle::random_instance(10 + k, 4, 500 + k);
        const double beta = fit_intercept(inst.X, inst.y);
        const double golden = oracle::golden_section_min(
            [&](double b) {
                return negloglik(inst.X, inst.y,
                                 Eigen::VectorXd::Constant(inst.X.cols(), b));
            },
            -20.0, 20.0);
        CHECK(beta == doctest::Approx(golden).epsilon(1e-8));
    }
}

TEST_CASE("fit_intercept satisfies its first-order condition tightly") {
    for (int k = 0; k < 10; ++k) {
        const auto inst = oracle::random_instance(20, 6, 700 + k, 5.0);
        const double beta = fit_intercept(inst.X, inst.y);
        const Eigen::VectorXd s = inst.X.rowwise().sum();
        Eigen::VectorXd probs(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i)
            probs[i] = sigmoid(beta * s[i]) - inst.y[i];
        CHECK(std::abs(compensated_dot(s, probs)) < 1e-10);
    }
}

TEST_CASE("fit_intercept rejects all-equal outcomes") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
    CHECK_THROWS_AS(fit_intercept(X, Eigen::VectorXd::Ones(3)), data_error);
    CHECK_THROWS_AS(fit_intercept(X, Eigen::VectorXd::Zero(3)), data_error);
}

TEST_CASE("fit_mle solves a well-conditioned instance") {
    const auto inst = oracle::random_instance(60, 4, 900);
    const MleResult mle = fit_mle(inst.X, inst.y, 1e-9, 100);
    CHECK(mle.converged);
    CHECK(mle.grad_inf <= 1e-9);
}
