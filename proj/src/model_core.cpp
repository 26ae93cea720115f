#include "ngd/model_core.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "ngd/errors.hpp"

namespace ngd {

namespace {

void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw InvalidInput(std::string(what) + ": expected a non-empty square matrix");
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entry");
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_sym(const Matrix& m, const char* what) {
    require_square(m, what);
    require_finite(m, what);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
    if (solver.info() != Eigen::Success) throw NumericError(std::string(what) + ": eigensolver failed");
    return solver;
}

}  // namespace

void GaussianParams::validate() const {
    const auto d = mean.size();
    if (d == 0) throw InvalidInput("GaussianParams: empty mean");
    if (covariance.rows() != d || covariance.cols() != d)
        throw InvalidInput("GaussianParams: covariance shape does not match mean");
    if (!mean.allFinite() || !covariance.allFinite()) throw InvalidInput("GaussianParams: non-finite entry");
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double a = covariance(i, j);
            if (std::abs(a - covariance(j, i)) > 1e-12 * std::max(1.0, std::abs(a)))
                throw InvalidInput("GaussianParams: covariance is not symmetric");
        }
    }
    if (min_eigenvalue(covariance) <= 0.0) throw DomainError("GaussianParams: covariance is not positive definite");
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j)
            if (std::abs(m(i, j) - m(j, i)) > tol * std::max(1.0, std::abs(m(i, j)))) return false;
    return true;
}

SymEigen sym_eigen(const Matrix& m) {
    auto solver = solve_sym(m, "sym_eigen");
    // Eigen returns ascending order.
    return {solver.eigenvectors().rowwise().reverse(), solver.eigenvalues().reverse()};
}

Matrix matrix_sqrt(const SymEigen& eig) {
    if (eig.eigenvalues.minCoeff() <= 0.0) throw DomainError("matrix_sqrt: matrix is not positive definite");
    const Matrix& B = eig.eigenvectors;
    return symmetrize(B * eig.eigenvalues.cwiseSqrt().asDiagonal() * B.transpose());
}

Matrix matrix_sqrt(const Matrix& m) { return matrix_sqrt(sym_eigen(m)); }

double min_eigenvalue(const Matrix& m) {
    return solve_sym(m, "min_eigenvalue").eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& m) {
    return solve_sym(m, "max_eigenvalue").eigenvalues().maxCoeff();
}

double spectral_norm_sym(const Matrix& m) {
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(symmetrize(m), Eigen::EigenvaluesOnly).eigenvalues();
    return ev.cwiseAbs().maxCoeff();
}

double cond_product_sqrt(const Matrix& C, const Matrix& sqrt_A) {
    if (C.rows() != sqrt_A.rows() || C.cols() != sqrt_A.cols())
        throw InvalidInput("cond_product: dimension mismatch");
    require_finite(C, "cond_product");
    // Singular values of sqrt(A) L, with C = L L^T, are the square roots of the
    // eigenvalues of sqrt(A) C sqrt(A). One-sided Jacobi keeps small singular
    // values accurate relative to their own size.
    Eigen::LLT<Matrix> llt(symmetrize(C));
    if (llt.info() != Eigen::Success) throw DomainError("cond_product: C is not positive definite");
    return cond_product_factor(llt.matrixL().toDenseMatrix(), sqrt_A);
}

double cond_product_factor(const Matrix& F, const Matrix& sqrt_A) {
    if (F.rows() != sqrt_A.rows() || F.cols() != sqrt_A.cols())
        throw InvalidInput("cond_product: dimension mismatch");
    require_finite(F, "cond_product");
    const Vector sv = Eigen::JacobiSVD<Matrix>(sqrt_A * F).singularValues();
    const double lo = sv.minCoeff();
    if (!(lo > 0.0)) throw DomainError("cond_product: product is not positive definite");
    const double r = sv.maxCoeff() / lo;
    return std::max(1.0, r * r);
}

double cond_product(const Matrix& C, const Matrix& A) {
    if (C.rows() != A.rows() || C.cols() != A.cols()) throw InvalidInput("cond_product: dimension mismatch");
    return cond_product_sqrt(C, matrix_sqrt(A));
}

NaturalGradient nat_grad_quadratic(const GaussianParams& params, const Matrix& A) {
    const auto d = params.dim();
    if (A.rows() != d || A.cols() != d || params.covariance.rows() != d)
        throw InvalidInput("nat_grad_quadratic: dimension mismatch");
    const Matrix CA = params.covariance * A;
    return {CA * params.mean, symmetrize(CA * params.covariance)};
}

NaturalGradient grad_log_likelihood(const GaussianParams& params, const Vector& x) {
    const auto d = params.dim();
    if (x.size() != d || params.covariance.rows() != d) throw InvalidInput("grad_log_likelihood: dimension mismatch");
    Eigen::LDLT<Matrix> ldlt(params.covariance);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
        throw DomainError("grad_log_likelihood: covariance is singular or indefinite");
    const Vector u = ldlt.solve(x - params.mean);
    const Matrix Cinv = ldlt.solve(Matrix::Identity(d, d));
    return {u, symmetrize(0.5 * (u * u.transpose() - Cinv))};
}

double log_density(const GaussianParams& params, const Vector& x) {
    const auto d = static_cast<double>(params.dim());
    Eigen::LLT<Matrix> llt(params.covariance);
    if (llt.info() != Eigen::Success) throw DomainError("log_density: covariance is not positive definite");
    const Vector y = llt.matrixL().solve(x - params.mean);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (d * std::log(2.0 * M_PI) + log_det + y.squaredNorm());
}

Matrix fisher_matrix(const GaussianParams& params) {
    const auto d = params.dim();
    if (params.covariance.rows() != d || params.covariance.cols() != d)
        throw InvalidInput("fisher_matrix: dimension mismatch");
    Eigen::LDLT<Matrix> ldlt(params.covariance);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
        throw DomainError("fisher_matrix: covariance is singular or indefinite");
    const Matrix Cinv = symmetrize(ldlt.solve(Matrix::Identity(d, d)));
    Matrix F = Matrix::Zero(d + d * d, d + d * d);
    F.topLeftCorner(d, d) = Cinv;
    F.bottomRightCorner(d * d, d * d) = 0.5 * Eigen::kroneckerProduct(Cinv, Cinv).eval();
    return F;
}

Vector vect(const Matrix& m) { return m.reshaped(); }

Vector stack(const NaturalGradient& g) {
    Vector out(g.delta_m.size() + g.delta_C.size());
    out << g.delta_m, vect(g.delta_C);
    return out;
}

}  // namespace ngd
