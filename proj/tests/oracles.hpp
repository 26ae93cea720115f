#pragma once

// Test-only reference computations. Nothing here calls into the code paths it
// is used to check.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Matrix random_orthogonal(int d, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = nd(gen);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // Fix column signs so the distribution is Haar.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

/// Q diag(lambda) Q^T with eigenvalues log-spaced over [1, cond].
inline Matrix random_spd(int d, double cond, std::mt19937_64& gen) {
    const Matrix q = random_orthogonal(d, gen);
    Vector lambda(d);
    for (int i = 0; i < d; ++i) lambda[i] = d == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / (d - 1));
    Matrix a = q * lambda.asDiagonal() * q.transpose();
    return 0.5 * (a + a.transpose());
}

/// Random SPD matrix with unconstrained spectrum, G G^T + d I scaled.
inline Matrix random_spd_wishart(int d, std::mt19937_64& gen) {
    std::normal_distribution<double> nd;
    Matrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = nd(gen);
    Matrix a = g * g.transpose() + 0.5 * Matrix::Identity(d, d);
    return 0.5 * (a + a.transpose());
}

inline Vector random_vector(int d, std::mt19937_64& gen, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = nd(gen);
    return v;
}

/// ln N(x; m, C) using LU on a possibly non-symmetric C, so that single
/// entries of C can be perturbed independently.
inline double log_density_lu(const Vector& m, const Matrix& C, const Vector& x) {
    const int d = static_cast<int>(m.size());
    Eigen::PartialPivLU<Matrix> lu(C);
    const Vector y = x - m;
    return -0.5 * (d * std::log(2.0 * M_PI) + std::log(lu.determinant()) + y.dot(lu.solve(y)));
}

/// Central differences of ln p in (m, C), entry by entry.
struct FdGradient {
    Vector dm;
    Matrix dC;
};

inline FdGradient fd_log_density(const Vector& m, const Matrix& C, const Vector& x, double h = 1e-5) {
    const int d = static_cast<int>(m.size());
    FdGradient g{Vector(d), Matrix(d, d)};
    for (int i = 0; i < d; ++i) {
        Vector mp = m, mm = m;
        mp[i] += h;
        mm[i] -= h;
        g.dm[i] = (log_density_lu(mp, C, x) - log_density_lu(mm, C, x)) / (2 * h);
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            Matrix cp = C, cm = C;
            cp(i, j) += h;
            cm(i, j) -= h;
            g.dC(i, j) = (log_density_lu(m, cp, x) - log_density_lu(m, cm, x)) / (2 * h);
        }
    return g;
}

/// Characteristic-polynomial eigenvalues of a symmetric 2x2 matrix, descending.
inline std::pair<double, double> eig2(const Matrix& m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(tr * tr / 4 - det);
    return {tr / 2 + disc, tr / 2 - disc};
}

/// Trace of the inverse Fisher metric restricted to symmetric covariance
/// directions: Tr(C) + Tr(C)^2 + Tr(C^2).
inline double fisher_inverse_trace_sym(const Matrix& C) {
    const double t = C.trace();
    return t + t * t + (C * C).trace();
}

/// Scalar iteration of the deterministic update restricted to eigenvalues of
/// sqrt(A) C sqrt(A): lambda <- lambda - (alpha / lambda_max) lambda^2.
inline Vector eigen_recurrence(Vector lambda, double alpha, int steps) {
    for (int t = 0; t < steps; ++t) {
        const double l1 = lambda.maxCoeff();
        lambda = lambda.array() - (alpha / l1) * lambda.array().square();
    }
    return lambda;
}

}  // namespace oracle
