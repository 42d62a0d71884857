#pragma once

#include <span>

#include "clvboost/types.hpp"

namespace clvboost {

/// Symmetric matrix validated on construction: max |S_ij - S_ji| must be
/// below 1e-10.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  const Matrix& get() const { return m_; }
  Index order() const { return m_.rows(); }

 private:
  Matrix m_;
};

struct Top2Eig {
  double lambda1 = 0.0;
  Vector u1;  // unit norm, largest-magnitude entry positive
  double lambda2 = 0.0;
};

struct EigenSystem {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values[i]; empty when not requested
};

/// Full spectrum of a symmetric matrix by cyclic Jacobi sweeps (cap 100
/// sweeps, off-diagonal Frobenius tolerance 1e-12 relative to the input
/// norm). Eigenvalues are sorted descending; for exact ties the original
/// diagonal order is kept.
EigenSystem sym_full_eig(const SymMatrix& s, bool with_vectors = true);

/// Top-2 eigenpair. The sign of u1 is fixed so that its largest-magnitude
/// entry is positive, ties resolved toward the lowest index; for a 1x1
/// input returns (S_00, [1], 0).
Top2Eig sym_top2_eig(const SymMatrix& s);

/// Lower-triangular L with L L^T = S and a strictly positive diagonal.
/// Throws NumericalError("matrix not positive definite") otherwise.
Matrix cholesky(const SymMatrix& s);

/// Product-moment correlation, clamped to [-1, 1]. Throws NumericalError
/// when either argument has zero variance.
double pearson_cor(std::span<const double> a, std::span<const double> b);
double pearson_cor(const Vector& a, const Vector& b);

struct GroupCriterion {
  double t = 0.0;   // lambda1(X^T X) / n^2
  Vector loadings;  // v, aligned with the columns of x_group; c = X v
  Vector component; // unit Euclidean norm, length n
};

/// Criterion, loadings and latent component of one group of centered
/// columns. The eigensolve runs on the smaller of the q x q cross-product or
/// the n x n Gram matrix; both routes apply the sym_top2_eig sign convention
/// to the loadings-space eigenvector.
GroupCriterion group_criterion(const Matrix& x_group);

/// Criterion value only. Follows the exact arithmetic path of
/// group_criterion so cached and recomputed values are bit-identical.
double group_criterion_value(const Matrix& x_group);

/// Flips u so its largest-magnitude entry is positive (ties toward the
/// lowest index). The convention keeps eigenvector-dependent artifacts
/// reproducible.
void fix_sign_convention(Vector& u);

/// Sample statistics (variance/sd use divisor n-1).
double sample_mean(const Vector& v);
double sample_variance(const Vector& v);
double sample_sd(const Vector& v);

}  // namespace clvboost
