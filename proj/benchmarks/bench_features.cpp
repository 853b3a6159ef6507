#include <benchmark/benchmark.h>

#include "sctqm/features.h"
#include "sctqm/synthetic.h"

using namespace sctqm;

namespace {

DensityGrid grid_for(int J) {
  const auto m = make_synthetic_dataset(1, 3).molecules[0];
  const auto planar = planarize(m, 0.1);
  std::vector<int> zs;
  for (const auto& a : planar.atoms()) zs.push_back(a.z);
  return rasterize(planar, make_profile_set(zs), 11.0, J);
}

FilterBankParams params(int J, int L) {
  FilterBankParams p;
  p.J = J;
  p.L = L;
  return p;
}

void BM_Rasterize(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const auto m = planarize(make_synthetic_dataset(1, 3).molecules[0], 0.1);
  std::vector<int> zs;
  for (const auto& a : m.atoms()) zs.push_back(a.z);
  const auto profiles = make_profile_set(zs);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(m, profiles, 11.0, J));
}
BENCHMARK(BM_Rasterize)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Fft2(benchmark::State& state) {
  const int n = 1 << state.range(0);
  std::vector<cplx> data(static_cast<std::size_t>(n) * n, cplx(1.0, 0.5));
  for (auto _ : state) {
    fft2(data, n);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Fft2)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_Fourier(benchmark::State& state) {
  const auto g = grid_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fourier_features(g));
}
BENCHMARK(BM_Fourier)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Wavelet(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  const auto g = grid_for(J);
  const auto bank = make_spatial_bank(params(J, 8));
  for (auto _ : state) benchmark::DoNotOptimize(wavelet_features(g, bank));
}
BENCHMARK(BM_Wavelet)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Scattering(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0)), L = static_cast<int>(state.range(1));
  const auto g = grid_for(J);
  const auto bank = make_filter_bank(params(J, L));
  for (auto _ : state) benchmark::DoNotOptimize(scattering_features(g, bank));
}
BENCHMARK(BM_Scattering)->Args({6, 4})->Args({7, 4})->Args({6, 8})->Unit(benchmark::kMillisecond);

void BM_SpatialBank(benchmark::State& state) {
  const int J = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(make_spatial_bank(params(J, 8)));
}
BENCHMARK(BM_SpatialBank)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
