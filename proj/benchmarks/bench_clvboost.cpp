#include <benchmark/benchmark.h>

#include "clvboost/boosting.hpp"
#include "clvboost/rng.hpp"
#include "clvboost/clv.hpp"
#include "clvboost/numerics.hpp"
#include "clvboost/simulate.hpp"

using namespace clvboost;

namespace {

Matrix grouped_block(int n, int p, std::uint64_t seed) {
  SimulationConfig config;
  config.n = n;
  const int groups = std::max(2, p / 10);
  config.group_sizes.assign(static_cast<std::size_t>(groups), p / groups);
  config.group_sizes.back() += p % groups;
  Matrix sigma = Matrix::Constant(groups, groups, 0.3);
  sigma.diagonal().setOnes();
  config.sigma = sigma;
  config.b = Vector::Zero(groups);
  config.b[0] = 2.0;
  config.b[1] = 1.0;
  config.seed = seed;
  Matrix x = simulate(config).x;
  for (Index j = 0; j < x.cols(); ++j) {
    x.col(j).array() -= x.col(j).mean();
    x.col(j) /= sample_sd(x.col(j));
  }
  return x;
}

}  // namespace

static void BM_JacobiSpectrum(benchmark::State& state) {
  const Index q = state.range(0);
  NormalSampler g(7);
  Matrix m(q, q + 2);
  for (Index i = 0; i < q; ++i)
    for (Index j = 0; j < q + 2; ++j) m(i, j) = g.next();
  const Matrix s = m * m.transpose() / static_cast<double>(q);
  for (auto _ : state)
    benchmark::DoNotOptimize(sym_full_eig(SymMatrix(s), false));
}
BENCHMARK(BM_JacobiSpectrum)->Arg(16)->Arg(64)->Arg(128);

static void BM_BuildHierarchy(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const Matrix x = grouped_block(100, p, 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_hierarchy(x, 0));
  state.SetItemsProcessed(state.iterations() * p);
}
BENCHMARK(BM_BuildHierarchy)->Unit(benchmark::kMillisecond)->Arg(50)->Arg(100)->Arg(200);

static void BM_FitToy(benchmark::State& state) {
  SimulationConfig config;
  config.seed = 1;
  const SimulatedData sim = simulate(config);
  Dataset data;
  data.values = sim.x;
  data.response = sim.y;
  for (Index j = 1; j <= sim.x.cols(); ++j)
    data.var_names.push_back("x" + std::to_string(j));
  for (auto _ : state)
    benchmark::DoNotOptimize(fit(data, 0.7, 20, ScalingMode::kStandard, 0));
}
BENCHMARK(BM_FitToy)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
