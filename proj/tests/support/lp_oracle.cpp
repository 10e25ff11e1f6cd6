#include "support/lp_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {
namespace {

constexpr double kTol = 1e-9;

// min c.x s.t. T x = b (b >= 0), x >= 0, starting from the given basis.
// Tableau rows are kept as B^-1 [A | b]; Bland's rule avoids cycling.
void simplex_phase(Eigen::MatrixXd& T, std::vector<int>& basis, const Eigen::VectorXd& c,
                   int usable_cols) {
    const int m = static_cast<int>(T.rows());
    const int last = static_cast<int>(T.cols()) - 1;
    for (int pivots = 0; pivots < 20000; ++pivots) {
        // reduced costs
        int enter = -1;
        for (int j = 0; j < usable_cols; ++j) {
            double rc = c[j];
            for (int i = 0; i < m; ++i) rc -= c[basis[i]] * T(i, j);
            if (rc < -kTol) { enter = j; break; } // Bland: smallest index
        }
        if (enter < 0) return;

        int leave = -1;
        double best = 0.0;
        for (int i = 0; i < m; ++i) {
            if (T(i, enter) > kTol) {
                const double ratio = T(i, last) / T(i, enter);
                if (leave < 0 || ratio < best - kTol ||
                    (ratio < best + kTol && basis[i] < basis[leave]))
                    { leave = i; best = ratio; }
            }
        }
        if (leave < 0) throw std::runtime_error("lp oracle: unbounded");

        T.row(leave) /= T(leave, enter);
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[leave] = enter;
    }
    throw std::runtime_error("lp oracle: pivot limit reached");
}

} // namespace

LpLambda0 lambda_zero_simplex(const Eigen::MatrixXd& D, const Eigen::VectorXd& u) {
    const int q = static_cast<int>(D.rows());
    const int p = static_cast<int>(D.cols());
    LpLambda0 result;
    result.omega = Eigen::VectorXd::Zero(q);
    if (q == 0) {
        if (u.cwiseAbs().maxCoeff() > 1e-9)
            throw std::runtime_error("lp oracle: infeasible (no edges)");
        return result;
    }

    // D^T has rank p-1 and 1.u = 0, so the last equality row is redundant;
    // dropping it keeps the constraints independent.
    const int pr = p - 1;
    const int m = pr + 2 * q;
    const int n = 4 * q + 1; // omega+, omega-, lambda, s+, s-
    const int lambda_col = 2 * q;

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    for (int l = 0; l < pr; ++l) {
        for (int r = 0; r < q; ++r) {
            const double d = D(r, l);
            if (d != 0.0) {
                A(l, r) = d;
                A(l, q + r) = -d;
            }
        }
        b[l] = u[l];
    }
    for (int r = 0; r < q; ++r) {
        // omega_r - lambda + s+_r = 0
        A(pr + r, r) = 1.0;
        A(pr + r, q + r) = -1.0;
        A(pr + r, lambda_col) = -1.0;
        A(pr + r, lambda_col + 1 + r) = 1.0;
        // -omega_r - lambda + s-_r = 0
        A(pr + q + r, r) = -1.0;
        A(pr + q + r, q + r) = 1.0;
        A(pr + q + r, lambda_col) = -1.0;
        A(pr + q + r, lambda_col + 1 + q + r) = 1.0;
    }
    for (int i = 0; i < m; ++i) {
        if (b[i] < 0.0) {
            A.row(i) = -A.row(i);
            b[i] = -b[i];
        }
    }

    // Phase 1 with an artificial per row.
    Eigen::MatrixXd T(m, n + m + 1);
    T.setZero();
    T.block(0, 0, m, n) = A;
    for (int i = 0; i < m; ++i) T(i, n + i) = 1.0;
    T.col(n + m) = b;
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) basis[i] = n + i;

    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
    c1.tail(m).setOnes();
    simplex_phase(T, basis, c1, n + m);
    double art = 0.0;
    for (int i = 0; i < m; ++i)
        if (basis[i] >= n) art += T(i, n + m);
    if (art > 1e-7) throw std::runtime_error("lp oracle: infeasible");

    // Drive any zero-level artificial out of the basis where possible.
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (int j = 0; j < n; ++j) {
            if (std::abs(T(i, j)) > kTol) {
                T.row(i) /= T(i, j);
                for (int r2 = 0; r2 < m; ++r2) {
                    if (r2 == i) continue;
                    const double f = T(r2, j);
                    if (f != 0.0) T.row(r2) -= f * T.row(i);
                }
                basis[i] = j;
                break;
            }
        }
    }

    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n + m);
    c2[lambda_col] = 1.0;
    simplex_phase(T, basis, c2, n);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
        if (basis[i] < n) x[basis[i]] = T(i, n + m);
    result.lambda0 = x[lambda_col];
    for (int r = 0; r < q; ++r) result.omega[r] = x[r] - x[q + r];
    return result;
}

} // namespace oracle
