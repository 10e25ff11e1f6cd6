#include "tvmap/model.hpp"

#include "tvmap/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>

namespace tvmap {

void validate_binary(const Eigen::VectorXd& y) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0)
            throw data_error("y must be binary (found " + std::to_string(y[i]) + " at row " +
                             std::to_string(i) + ")");
    }
}

bool has_both_classes(const Eigen::VectorXd& y) {
    bool zero = false, one = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) zero = true;
        else one = true;
    }
    return zero && one;
}

double compensated_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double term = a[i] * b[i];
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
    }
    return sum + comp;
}

std::pair<double, Eigen::VectorXd> negloglik_and_grad(const Eigen::MatrixXd& X,
                                                      const Eigen::VectorXd& y,
                                                      const Eigen::VectorXd& mu) {
    if (X.rows() != y.size())
        throw data_error("negloglik: X rows and y length differ");
    if (X.cols() != mu.size())
        throw data_error("negloglik: X cols and mu length differ");
    if (!X.allFinite() || !mu.allFinite())
        throw data_error("negloglik: non-finite entries in X or mu");
    validate_binary(y);

    const Eigen::VectorXd eta = X * mu;
    double h = 0.0;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // y log(1+e^-eta) + (1-y) log(1+e^eta), via softplus
        h += (y[i] == 1.0) ? softplus(-eta[i]) : softplus(eta[i]);
        resid[i] = sigmoid(eta[i]) - y[i];
    }
    return {h, X.transpose() * resid};
}

double negloglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& mu) {
    const Eigen::VectorXd eta = X * mu;
    double h = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        h += (y[i] == 1.0) ? softplus(-eta[i]) : softplus(eta[i]);
    return h;
}

MleResult fit_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double tol,
                  int max_iter) {
    if (!has_both_classes(y))
        throw data_error("fit_mle: y is all zeros or all ones");
    const Eigen::Index p = X.cols();

    MleResult result;
    result.mu = Eigen::VectorXd::Zero(p);
    double value = negloglik(X, y, result.mu);
    for (int iter = 1; iter <= max_iter; ++iter) {
        result.iterations = iter;
        const Eigen::VectorXd eta = X * result.mu;
        Eigen::VectorXd resid(eta.size()), weight(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            const double s = sigmoid(eta[i]);
            resid[i] = s - y[i];
            weight[i] = s * (1.0 - s);
        }
        const Eigen::VectorXd grad = X.transpose() * resid;
        result.grad_inf = grad.cwiseAbs().maxCoeff();
        if (result.grad_inf <= tol) {
            result.converged = true;
            return result;
        }

        Eigen::MatrixXd H = X.transpose() * weight.asDiagonal() * X;
        Eigen::VectorXd step;
        double damping = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            Eigen::MatrixXd Hd = H;
            if (damping > 0.0) Hd.diagonal().array() += damping;
            Eigen::LLT<Eigen::MatrixXd> llt(Hd);
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(grad);
                if (step.allFinite()) break;
            }
            damping = (damping == 0.0) ? 1e-10 * (1.0 + H.trace() / static_cast<double>(p))
                                       : damping * 100.0;
            step.resize(0);
        }
        if (step.size() == 0) return result;

        double t = 1.0;
        bool accepted = false;
        const double slope = grad.dot(step);
        for (int ls = 0; ls < 50; ++ls) {
            const double trial = negloglik(X, y, result.mu + t * step);
            if (trial <= value + 0.25 * t * slope) {
                result.mu += t * step;
                value = trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) return result; // stalled below machine resolution
    }
    return result;
}

double fit_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size())
        throw data_error("fit_intercept: X rows and y length differ");
    if (!X.allFinite())
        throw data_error("fit_intercept: non-finite entries in X");
    // Fractional outcomes in [0, 1] are accepted: the score equation is
    // defined for them and the zero-threshold plumbing exploits that.
    for (Eigen::Index i = 0; i < y.size(); ++i)
        if (!(y[i] >= 0.0 && y[i] <= 1.0))
            throw data_error("fit_intercept: y entries must lie in [0, 1]");
    if (y.maxCoeff() <= 0.0 || y.minCoeff() >= 1.0)
        throw data_error("fit_intercept: y is all zeros or all ones; the constant-map MLE "
                         "diverges to +-inf");

    const Eigen::VectorXd s = X.rowwise().sum();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] <= 0.0)
            throw data_error("fit_intercept: row " + std::to_string(i) +
                             " of X has no positive dwell time");
    }

    // f(b) = s . (sigma(b s) - y) is strictly increasing with a sign change,
    // so Newton with a bisection safeguard cannot escape the bracket.
    Eigen::VectorXd probs(s.size());
    const auto eval = [&](double b) {
        for (Eigen::Index i = 0; i < s.size(); ++i) probs[i] = sigmoid(b * s[i]) - y[i];
        return compensated_dot(s, probs);
    };

    double lo = 0.0, hi = 0.0, flo = eval(0.0), fhi = flo;
    if (flo == 0.0) return 0.0;
    double step = 1.0 / s.maxCoeff();
    if (flo > 0.0) {
        while (flo > 0.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
            flo = eval(lo);
            if (step > 1e12) throw numeric_error("fit_intercept: failed to bracket the root");
        }
    } else {
        while (fhi < 0.0) {
            lo = hi;
            hi += step;
            step *= 2.0;
            fhi = eval(hi);
            if (step > 1e12) throw numeric_error("fit_intercept: failed to bracket the root");
        }
    }

    double b = 0.5 * (lo + hi);
    double fb = eval(b);
    const double scale = s.sum();
    for (int iter = 0; iter < 200 && std::abs(fb) > 1e-15 * scale; ++iter) {
        if (fb > 0.0) hi = b; else lo = b;
        double fprime = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double p = sigmoid(b * s[i]);
            fprime += s[i] * s[i] * p * (1.0 - p);
        }
        double next = (fprime > 0.0) ? b - fb / fprime : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi); // bisection fallback
        if (next == b) break;
        b = next;
        fb = eval(b);
    }
    return b;
}

} // namespace tvmap
