#include "clvboost/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "clvboost/errors.hpp"

namespace clvboost {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kOffDiagTol = 1e-12;  // relative to the input Frobenius norm
constexpr int kMaxSweeps = 100;

struct JacobiOut {
  Vector d;  // unsorted eigenvalues (diagonal after convergence)
  Matrix v;  // accumulated rotations; empty when not requested
};

// Cyclic Jacobi with a fixed row-major rotation order. The rotation sequence
// does not depend on whether eigenvectors are accumulated, so the value-only
// path returns bit-identical eigenvalues.
JacobiOut jacobi_sweeps(Matrix a, bool with_vectors) {
  const Index q = a.rows();
  Matrix v;
  if (with_vectors) v = Matrix::Identity(q, q);
  if (q == 1) return {a.diagonal(), v};

  const double tol = kOffDiagTol * a.norm();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Index i = 0; i < q; ++i)
      for (Index j = i + 1; j < q; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(2.0 * off) <= tol) return {a.diagonal(), v};

    for (Index i = 0; i < q; ++i) {
      for (Index j = i + 1; j < q; ++j) {
        const double apq = a(i, j);
        const double g = 100.0 * std::abs(apq);
        // Elements that can no longer move the diagonal are zeroed outright.
        if (sweep > 3 && std::abs(a(i, i)) + g == std::abs(a(i, i)) &&
            std::abs(a(j, j)) + g == std::abs(a(j, j))) {
          a(i, j) = a(j, i) = 0.0;
          continue;
        }
        if (apq == 0.0) continue;

        const double h = a(j, j) - a(i, i);
        double t;
        if (std::abs(h) + g == std::abs(h)) {
          t = apq / h;
        } else {
          const double theta = 0.5 * h / apq;
          t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double change = t * apq;

        a(i, i) -= change;
        a(j, j) += change;
        a(i, j) = a(j, i) = 0.0;
        for (Index k = 0; k < q; ++k) {
          if (k == i || k == j) continue;
          const double aki = a(k, i);
          const double akj = a(k, j);
          a(k, i) = c * aki - s * akj;
          a(k, j) = s * aki + c * akj;
          a(i, k) = a(k, i);
          a(j, k) = a(k, j);
        }
        if (with_vectors) {
          for (Index k = 0; k < q; ++k) {
            const double vki = v(k, i);
            const double vkj = v(k, j);
            v(k, i) = c * vki - s * vkj;
            v(k, j) = s * vki + c * vkj;
          }
        }
      }
    }
  }
  throw NumericalError("eigensolver did not converge within 100 sweeps");
}

// Descending eigenvalue order; exact ties keep the original diagonal order.
std::vector<Index> sort_order(const Vector& d) {
  std::vector<Index> order(static_cast<std::size_t>(d.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return d[a] > d[b]; });
  return order;
}

Matrix cross_product(const Matrix& x) {
  const Index q = x.cols();
  Matrix s = Matrix::Zero(q, q);
  s.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose();
  return s;
}

Matrix gram(const Matrix& x) {
  const Index n = x.rows();
  Matrix g = Matrix::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(x);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw DataError("symmetric matrix must be square and non-empty");
  for (Index i = 0; i < m_.rows(); ++i)
    for (Index j = i + 1; j < m_.cols(); ++j)
      if (std::abs(m_(i, j) - m_(j, i)) >= kSymTol)
        throw DataError("matrix not symmetric");
}

EigenSystem sym_full_eig(const SymMatrix& s, bool with_vectors) {
  JacobiOut out = jacobi_sweeps(s.get(), with_vectors);
  const auto order = sort_order(out.d);
  const Index q = out.d.size();
  EigenSystem sys;
  sys.values.resize(q);
  for (Index i = 0; i < q; ++i) sys.values[i] = out.d[order[i]];
  if (with_vectors) {
    sys.vectors.resize(q, q);
    for (Index i = 0; i < q; ++i) sys.vectors.col(i) = out.v.col(order[i]);
  }
  return sys;
}

Top2Eig sym_top2_eig(const SymMatrix& s) {
  Top2Eig top;
  if (s.order() == 1) {
    top.lambda1 = s.get()(0, 0);
    top.u1 = Vector::Ones(1);
    top.lambda2 = 0.0;
    return top;
  }
  EigenSystem sys = sym_full_eig(s, true);
  top.lambda1 = sys.values[0];
  top.lambda2 = sys.values[1];
  top.u1 = sys.vectors.col(0);
  fix_sign_convention(top.u1);
  return top;
}

Matrix cholesky(const SymMatrix& s) {
  const Index q = s.order();
  const Matrix& a = s.get();
  Matrix l = Matrix::Zero(q, q);
  for (Index j = 0; j < q; ++j) {
    double diag = a(j, j);
    for (Index k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw NumericalError("matrix not positive definite");
    l(j, j) = std::sqrt(diag);
    for (Index i = j + 1; i < q; ++i) {
      double sum = a(i, j);
      for (Index k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }
  return l;
}

double pearson_cor(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw DimensionError("correlation needs two vectors of equal length");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw NumericalError("correlation undefined for zero-variance input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double pearson_cor(const Vector& a, const Vector& b) {
  return pearson_cor(
      std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
      std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

namespace {

// Shared routing of the group eigenproblem. Returns lambda1 plus, when
// requested, the loadings-space eigenvector u1 (sign-fixed).
double group_lambda1(const Matrix& x, bool want_u1, Vector* u1_out) {
  const Index n = x.rows();
  const Index q = x.cols();
  if (q < 1 || n < 1) throw DataError("empty group block");
  if (x.squaredNorm() == 0.0)
    throw NumericalError("degenerate group: all columns are zero");

  if (q <= n) {
    SymMatrix s(cross_product(x));
    if (!want_u1) return sym_full_eig(s, false).values[0];
    Top2Eig top = sym_top2_eig(s);
    *u1_out = top.u1;
    return top.lambda1;
  }

  SymMatrix g(gram(x));
  if (!want_u1) return sym_full_eig(g, false).values[0];
  Top2Eig top = sym_top2_eig(g);
  if (!(top.lambda1 > 0.0))
    throw NumericalError("degenerate group: zero leading eigenvalue");
  Vector u1 = x.transpose() * top.u1;
  const double norm = u1.norm();
  if (!(norm > 0.0))
    throw NumericalError("degenerate group: zero loading vector");
  u1 /= norm;
  fix_sign_convention(u1);
  *u1_out = u1;
  return top.lambda1;
}

}  // namespace

GroupCriterion group_criterion(const Matrix& x_group) {
  const Index n = x_group.rows();
  Vector u1;
  const double lambda1 = group_lambda1(x_group, true, &u1);

  GroupCriterion out;
  out.t = lambda1 / (static_cast<double>(n) * static_cast<double>(n));
  Vector c = x_group * u1;
  const double norm = c.norm();
  if (!(norm > 0.0))
    throw NumericalError("degenerate group: zero component");
  out.component = c / norm;
  out.loadings = u1 / norm;
  return out;
}

double group_criterion_value(const Matrix& x_group) {
  const Index n = x_group.rows();
  const double lambda1 = group_lambda1(x_group, false, nullptr);
  return lambda1 / (static_cast<double>(n) * static_cast<double>(n));
}

void fix_sign_convention(Vector& u) {
  Index best = 0;
  double best_abs = std::abs(u[0]);
  for (Index i = 1; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    if (a > best_abs) {
      best = i;
      best_abs = a;
    }
  }
  if (u[best] < 0.0) u = -u;
}

double sample_mean(const Vector& v) { return v.mean(); }

double sample_variance(const Vector& v) {
  if (v.size() < 2) throw DataError("variance needs at least two values");
  const double m = v.mean();
  return (v.array() - m).matrix().squaredNorm() /
         static_cast<double>(v.size() - 1);
}

double sample_sd(const Vector& v) { return std::sqrt(sample_variance(v)); }

}  // namespace clvboost
