#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "clvboost/types.hpp"

namespace clvboost {

/// Grouped-predictor generator: correlated prototypes, per-variable random
/// sign, additive Gaussian noise, linear response.
struct SimulationConfig {
  int n = 100;
  std::vector<int> group_sizes = {35, 5, 10, 10, 10};
  // Empty sigma/b fall back to the packaged five-group defaults when the
  // group count is 5, and to independent prototypes with unit coefficients
  // otherwise.
  Matrix sigma;         // K x K prototype covariance
  Vector b;             // response coefficients
  double noise_sd_x = 1.0;
  double noise_sd_y = 1.0;
  std::uint64_t seed = 1;
};

Matrix default_prototype_sigma();
Vector default_response_coefficients();

struct SimulatedData {
  Matrix x;                    // n x p
  Vector y;                    // length n
  std::vector<int> allocation; // true group of each variable, 0-based
  std::vector<int> omega;      // +1 / -1 per variable
  Matrix z;                    // n x K standardized prototypes
};

/// Deterministic given config.seed. Prototype rows are drawn from
/// N(0, sigma) via the Cholesky factor, then each prototype column is
/// centered and standardized empirically.
SimulatedData simulate(const SimulationConfig& config);

/// Deterministic standard-normal stream (xoshiro256++ seeded by splitmix64,
/// Box-Muller pairs with the sine branch discarded).
std::vector<double> standard_normals(std::uint64_t seed, std::size_t count);

}  // namespace clvboost
