#include "clvboost/simulate.hpp"

#include <cmath>
#include <numeric>

#include "clvboost/errors.hpp"
#include "clvboost/numerics.hpp"
#include "clvboost/rng.hpp"

namespace clvboost {

Matrix default_prototype_sigma() {
  Matrix sigma(5, 5);
  sigma << 1.0, 0.5, 0.5, 0.5, 0.1,
           0.5, 1.0, 0.5, 0.1, 0.1,
           0.5, 0.5, 1.0, 0.1, 0.1,
           0.5, 0.1, 0.1, 1.0, 0.1,
           0.1, 0.1, 0.1, 0.1, 1.0;
  return sigma;
}

Vector default_response_coefficients() {
  Vector b(5);
  b << 1.0, 5.0, 3.0, 0.0, 0.0;
  return b;
}

SimulatedData simulate(const SimulationConfig& config) {
  const int n = config.n;
  if (n < 2) throw DataError("need at least 2 observations");
  if (config.group_sizes.empty()) throw DataError("group_sizes must be non-empty");
  for (const int size : config.group_sizes)
    if (size < 1) throw DataError("every group needs at least one variable");
  const int k = static_cast<int>(config.group_sizes.size());
  const int p = std::accumulate(config.group_sizes.begin(),
                                config.group_sizes.end(), 0);

  // Defaults adapt to the group count: the packaged five-group covariance
  // and coefficients when K = 5, independent prototypes and unit
  // coefficients otherwise.
  Matrix sigma = config.sigma.size()
                     ? config.sigma
                     : (k == 5 ? default_prototype_sigma()
                               : Matrix(Matrix::Identity(k, k)));
  Vector b = config.b.size()
                 ? config.b
                 : (k == 5 ? default_response_coefficients()
                           : Vector(Vector::Ones(k)));
  if (sigma.rows() != k || sigma.cols() != k)
    throw DimensionError("sigma order does not match the group count");
  if (b.size() != k)
    throw DimensionError("coefficient length does not match the group count");
  if (!(config.noise_sd_x >= 0.0) || !(config.noise_sd_y >= 0.0))
    throw DataError("noise standard deviations must be non-negative");

  const Matrix chol = cholesky(SymMatrix(sigma));  // throws if not PD

  NormalSampler normals(config.seed);
  SimulatedData out;

  // Draw order is pinned: prototype rows, then signs, then the predictor
  // noise column by column, then the response noise.
  Matrix z_raw(n, k);
  Vector g(k);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < k; ++c) g[c] = normals.next();
    z_raw.row(i) = (chol * g).transpose();
  }

  out.z.resize(n, k);
  for (int c = 0; c < k; ++c) {
    const double mean = z_raw.col(c).mean();
    Vector centered = z_raw.col(c).array() - mean;
    const double sd =
        std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw NumericalError("degenerate prototype draw");
    out.z.col(c) = centered / sd;
  }

  out.allocation.reserve(static_cast<std::size_t>(p));
  for (int grp = 0; grp < k; ++grp)
    out.allocation.insert(out.allocation.end(),
                          static_cast<std::size_t>(config.group_sizes[static_cast<std::size_t>(grp)]),
                          grp);

  out.omega.resize(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j)
    out.omega[static_cast<std::size_t>(j)] =
        normals.engine().uniform() < 0.5 ? 1 : -1;

  out.x.resize(n, p);
  for (int j = 0; j < p; ++j) {
    const int grp = out.allocation[static_cast<std::size_t>(j)];
    const double sign = static_cast<double>(out.omega[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i)
      out.x(i, j) = sign * out.z(i, grp) + config.noise_sd_x * normals.next();
  }

  out.y.resize(n);
  for (int i = 0; i < n; ++i)
    out.y[i] = out.z.row(i).dot(b) + config.noise_sd_y * normals.next();

  return out;
}

std::vector<double> standard_normals(std::uint64_t seed, std::size_t count) {
  NormalSampler sampler(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler.next());
  return out;
}

}  // namespace clvboost
