#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <utility>

namespace tvmap {

inline double sigmoid(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow for large |t|.
inline double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

// Solver knobs shared by the iterative fits.
struct FitConfig {
    double tol = 1e-6;        // relative stopping tolerance (residuals)
    double tol_kkt = 1e-5;    // absolute bound on ||grad h + D^T omega||_inf
    int max_iter = 20000;
    std::uint64_t seed = 0;
};

// Bernoulli negative log-likelihood of mu under the logit link and its
// gradient X^T (sigma(X mu) - y). Rejects non-finite entries.
std::pair<double, Eigen::VectorXd> negloglik_and_grad(const Eigen::MatrixXd& X,
                                                      const Eigen::VectorXd& y,
                                                      const Eigen::VectorXd& mu);

double negloglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& mu);

// MLE of the constant map height: argmin_b h(b * 1; y). Requires both
// outcome classes present; the minimizer runs away to +-inf otherwise.
double fit_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Unpenalized logistic MLE by damped Newton. converged == false signals
// non-convergence within max_iter, which for logistic regression usually
// means (quasi-)separation: the likelihood keeps improving along a ray.
struct MleResult {
    Eigen::VectorXd mu;
    double grad_inf = 0.0;
    bool converged = false;
    int iterations = 0;
};
MleResult fit_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tol,
                  int max_iter);

// Compensated (Neumaier) dot product; the intercept's first-order condition
// and the score vector u = X^T (y - eps) need more accuracy than a plain
// accumulation gives when dwell times are large.
double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

void validate_binary(const Eigen::VectorXd& y);
bool has_both_classes(const Eigen::VectorXd& y);

} // namespace tvmap
