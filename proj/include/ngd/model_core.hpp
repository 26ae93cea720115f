#pragma once

// Symmetric positive-definite linear algebra and the information-geometric
// quantities of the Gaussian family parameterized by (mean, covariance).

#include <Eigen/Dense>

namespace ngd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Mean and covariance of a multivariate Gaussian search distribution.
struct GaussianParams {
    Vector mean;
    Matrix covariance;

    Eigen::Index dim() const { return mean.size(); }

    /// Throws InvalidInput on shape/symmetry problems and DomainError when the
    /// covariance is not positive definite.
    void validate() const;
};

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
struct SymEigen {
    Matrix eigenvectors;
    Vector eigenvalues;
};

/// Pair of mean and covariance directions. Used both for natural gradients and
/// for the (vanilla) log-likelihood gradient.
struct NaturalGradient {
    Vector delta_m;
    Matrix delta_C;
};

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-12);

/// Eigendecomposition of the symmetric part of `m`.
SymEigen sym_eigen(const Matrix& m);

/// Principal square root B sqrt(D) B^T of a symmetric positive-definite matrix.
Matrix matrix_sqrt(const Matrix& m);

/// Same as matrix_sqrt, starting from an existing decomposition.
Matrix matrix_sqrt(const SymEigen& eig);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Matrix& m);

/// Largest eigenvalue of the symmetric part of `m`.
double max_eigenvalue(const Matrix& m);

/// Largest absolute eigenvalue of a symmetric matrix (its spectral norm).
double spectral_norm_sym(const Matrix& m);

/// Cond(C A) computed as lambda_max / lambda_min of sqrt(A) C sqrt(A).
double cond_product(const Matrix& C, const Matrix& A);

/// Overload taking a precomputed sqrt(A).
double cond_product_sqrt(const Matrix& C, const Matrix& sqrt_A);

/// Cond(C A) for C = F F^T, from the singular values of sqrt(A) F.
double cond_product_factor(const Matrix& F, const Matrix& sqrt_A);

/// Closed-form natural gradient of the expected quadratic cost, up to a
/// positive factor: (C A m, C A C).
NaturalGradient nat_grad_quadratic(const GaussianParams& params, const Matrix& A);

/// Gradient of ln p(x) with respect to (m, C):
/// (C^-1 (x - m), 1/2 (C^-1 (x - m)(x - m)^T C^-1 - C^-1)).
NaturalGradient grad_log_likelihood(const GaussianParams& params, const Vector& x);

/// ln N(x; m, C).
double log_density(const GaussianParams& params, const Vector& x);

/// Fisher information in the coordinates (m, vec(C)), vec column-major:
/// block-diag(C^-1, 1/2 (C^-1 kron C^-1)).
Matrix fisher_matrix(const GaussianParams& params);

/// Column-major vectorization.
Vector vect(const Matrix& m);

/// Stacks (delta_m, vec(delta_C)).
Vector stack(const NaturalGradient& g);

}  // namespace ngd
