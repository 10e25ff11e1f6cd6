#include "tvmap/qut.hpp"

#include "tvmap/errors.hpp"
#include "tvmap/flow.hpp"
#include "tvmap/parallel.hpp"
#include "tvmap/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>

namespace tvmap {

LambdaZeroResult lambda_zero(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const DifferenceOperator& D) {
    if (X.rows() != y.size())
        throw data_error("lambda_zero: X rows and y length differ");
    if (X.cols() != D.p)
        throw data_error("lambda_zero: X cols and difference operator disagree");

    LambdaZeroResult result;
    result.beta0 = fit_intercept(X, y); // rejects all-equal y

    const Eigen::VectorXd s = X.rowwise().sum();
    Eigen::VectorXd resid(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        resid[i] = y[i] - sigmoid(result.beta0 * s[i]);

    Eigen::VectorXd u(X.cols());
    for (Eigen::Index l = 0; l < X.cols(); ++l)
        u[l] = compensated_dot(X.col(l), resid);

    const auto flow = detail::min_congestion_flow(static_cast<int>(X.cols()), D.pairs, u);
    result.lambda0 = flow.lambda0;
    result.omega = flow.edge_flow;
    result.feasible = flow.feasible;
    result.feasibility_residual = flow.max_residual;
    return result;
}

double upper_quantile_order_stat(const std::vector<double>& sorted, double alpha) {
    const int m = static_cast<int>(sorted.size());
    int k = static_cast<int>(std::ceil((1.0 - alpha) * m));
    k = std::clamp(k, 1, m);
    return sorted[static_cast<std::size_t>(k - 1)];
}

namespace {

// Draws y ~ Bernoulli(sigma(beta0 * rowsum)) until both classes appear,
// within a 10-attempt budget keyed by (seed, index, attempt).
Eigen::VectorXd draw_null_outcomes(const Eigen::VectorXd& probs, std::uint64_t seed,
                                   std::uint64_t index, int& discards,
                                   const char* who) {
    Eigen::VectorXd y(probs.size());
    for (int attempt = 0; attempt < 10; ++attempt) {
        Rng rng(derive_seed(seed, index, static_cast<std::uint64_t>(attempt)));
        bool any0 = false, any1 = false;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
            y[i] = rng.bernoulli(probs[i]) ? 1.0 : 0.0;
            (y[i] == 1.0 ? any1 : any0) = true;
        }
        if (any0 && any1) return y;
        ++discards;
    }
    throw data_error(std::string(who) +
                     ": all Monte Carlo draws degenerate (all-0 or all-1); "
                     "beta0 is too extreme for this design");
}

} // namespace

QutResult qut_estimate(const Eigen::MatrixXd& X, const DifferenceOperator& D, double alpha,
                       int m, std::uint64_t seed, double beta0, int workers) {
    if (m < 50) throw data_error("qut_estimate: m must be at least 50");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw data_error("qut_estimate: alpha must lie in (0, 1)");

    const Eigen::VectorXd s = X.rowwise().sum();
    Eigen::VectorXd probs(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) probs[i] = sigmoid(beta0 * s[i]);

    QutResult result;
    result.alpha = alpha;
    result.m = m;
    result.seed = seed;
    result.beta0 = beta0;
    result.samples.assign(static_cast<std::size_t>(m), 0.0);

    std::atomic<int> discards{0};
    parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t j) {
        int local_discards = 0;
        const Eigen::VectorXd yj =
            draw_null_outcomes(probs, seed, j, local_discards, "qut_estimate");
        result.samples[j] = lambda_zero(X, yj, D).lambda0;
        discards += local_discards;
    });
    result.discards = discards.load();

    std::sort(result.samples.begin(), result.samples.end());
    result.lambda_qut = upper_quantile_order_stat(result.samples, alpha);
    return result;
}

std::string test_method_name(TestMethod method) {
    switch (method) {
        case TestMethod::TV: return "TV";
        case TestMethod::LRT_chi2: return "LRT_chi2";
        case TestMethod::LRT_exact: return "LRT_exact";
    }
    return "unknown";
}

TestReport tv_test(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const DifferenceOperator& D, double alpha, int m, std::uint64_t seed,
                   int workers) {
    const LambdaZeroResult lz = lambda_zero(X, y, D);
    const QutResult qut = qut_estimate(X, D, alpha, m, seed, lz.beta0, workers);

    TestReport report;
    report.statistic = lz.lambda0;
    report.threshold = qut.lambda_qut;
    report.reject = report.statistic >= report.threshold;
    report.method = TestMethod::TV;
    report.alpha = alpha;
    report.m = m;
    report.seed = seed;
    report.discards = qut.discards;
    return report;
}

namespace {

struct LrtFit {
    double statistic = 0.0;
    bool separated = false;
};

// 2 [h(beta0 1) - h(mu_MLE)]. Divergence of the MLE (separation) drives the
// fitted probabilities to 0/1, so the achieved statistic approaches its
// supremum 2 h(beta0 1); the safeguard flags it.
LrtFit lrt_statistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const double beta0 = fit_intercept(X, y);
    const Eigen::VectorXd base = Eigen::VectorXd::Constant(X.cols(), beta0);
    const double h0 = negloglik(X, y, base);

    const MleResult mle = fit_mle(X, y, 1e-8 * std::max(1.0, X.cwiseAbs().maxCoeff()), 200);
    const double h1 = negloglik(X, y, mle.mu);

    LrtFit fit;
    fit.statistic = std::max(0.0, 2.0 * (h0 - h1));
    const double eta_max = (X * mle.mu).cwiseAbs().maxCoeff();
    fit.separated = !mle.converged || eta_max > 30.0;
    return fit;
}

} // namespace

TestReport lrt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, LrtMode mode,
               double alpha, int m, std::uint64_t seed, int workers) {
    const Eigen::Index n = X.rows(), p = X.cols();
    if (n < p)
        throw data_error("lrt: requires n >= p (n=" + std::to_string(n) +
                         ", p=" + std::to_string(p) + "); use tv_test instead");
    validate_binary(y);
    if (!has_both_classes(y)) throw data_error("lrt: y is all zeros or all ones");
    if (!(alpha > 0.0 && alpha < 1.0)) throw data_error("lrt: alpha must lie in (0, 1)");

    const LrtFit observed = lrt_statistic(X, y);

    TestReport report;
    report.statistic = observed.statistic;
    report.alpha = alpha;
    report.seed = seed;
    report.separated = observed.separated;

    if (mode == LrtMode::chi2) {
        boost::math::chi_squared chi2(static_cast<double>(p - 1));
        report.threshold = boost::math::quantile(chi2, 1.0 - alpha);
        report.method = TestMethod::LRT_chi2;
        report.m = 0;
    } else {
        const double beta0 = fit_intercept(X, y);
        const Eigen::VectorXd s = X.rowwise().sum();
        Eigen::VectorXd probs(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) probs[i] = sigmoid(beta0 * s[i]);

        std::vector<double> stats(static_cast<std::size_t>(m), 0.0);
        std::atomic<int> discards{0};
        parallel_for(static_cast<std::size_t>(m), workers, [&](std::size_t j) {
            int local_discards = 0;
            const Eigen::VectorXd yj = draw_null_outcomes(probs, seed, j, local_discards, "lrt");
            stats[j] = lrt_statistic(X, yj).statistic;
            discards += local_discards;
        });
        std::sort(stats.begin(), stats.end());
        report.threshold = upper_quantile_order_stat(stats, alpha);
        report.method = TestMethod::LRT_exact;
        report.m = m;
        report.discards = discards.load();
    }
    report.reject = report.statistic >= report.threshold;
    return report;
}

} // namespace tvmap
