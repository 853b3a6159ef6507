#include <random>

#include <benchmark/benchmark.h>

#include "sctqm/coulomb.h"
#include "sctqm/ols.h"
#include "sctqm/synthetic.h"

using namespace sctqm;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  std::vector<double> y;
};

Problem random_problem(int n, int d) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  Problem p{Eigen::MatrixXd(n, d), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) p.x(i, k) = g(rng);
    p.y[i] = p.x(i, 0) - 2.0 * p.x(i, d / 2) + 0.1 * g(rng);
  }
  return p;
}

void BM_OlsFit(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0)), d = static_cast<int>(state.range(1));
  const auto p = random_problem(n, d);
  const auto m = static_cast<std::size_t>(std::min(n, 200));
  for (auto _ : state) benchmark::DoNotOptimize(ols_fit(p.x, p.y, m));
}
BENCHMARK(BM_OlsFit)->Args({200, 61})->Args({200, 1537})->Args({400, 11071})->Unit(benchmark::kMillisecond);

void BM_ModelOrder(benchmark::State& state) {
  const auto p = random_problem(200, 1537);
  const auto folds = assign_folds(p.y, 5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(select_model_order(p.x, p.y, folds, 100));
}
BENCHMARK(BM_ModelOrder)->Unit(benchmark::kMillisecond);

void BM_CoulombCopies(benchmark::State& state) {
  const auto d = make_synthetic_dataset(200, 7);
  const int k = max_atom_count(d.molecules);
  for (auto _ : state) benchmark::DoNotOptimize(coulomb_copies(d.molecules, k, 8, 1.0, 1));
}
BENCHMARK(BM_CoulombCopies)->Unit(benchmark::kMillisecond);

void BM_L1Distances(benchmark::State& state) {
  const auto d = make_synthetic_dataset(static_cast<int>(state.range(0)), 7);
  const auto c = coulomb_copies(d.molecules, max_atom_count(d.molecules), 8, 1.0, 1);
  for (auto _ : state) benchmark::DoNotOptimize(l1_distances(c.rows, c.rows));
}
BENCHMARK(BM_L1Distances)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace
