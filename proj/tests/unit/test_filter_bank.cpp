#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sctqm/errors.h"
#include "sctqm/filter_bank.h"

using namespace sctqm;

namespace {

constexpr double kPi = std::numbers::pi;

FilterBankParams toy_params(int J = 4, int L = 4) {
  FilterBankParams p;
  p.J = J;
  p.L = L;
  return p;
}

// Frequency response built the other way round: sample the dilated, rotated
// Morlet on the integer lattice, wrap it onto the n x n torus, transform.
std::vector<double> spatial_oracle(const FilterBankParams& p, int j, int t) {
  const int n = p.side();
  const double s = std::pow(2.0, 0.5 * j);
  const double th = t * kPi / p.L;
  const int reach = static_cast<int>(std::ceil(s * std::sqrt(80.0) / std::min(1.0, p.slant))) + 2;
  std::vector<cplx> mod, env;
  std::vector<std::pair<int, int>> at;
  cplx sum_mod = 0.0;
  double sum_env = 0.0;
  for (int x = -reach; x <= reach; ++x)
    for (int y = -reach; y <= reach; ++y) {
      // r_{-θ} u, then dilate.
      const double a = (std::cos(th) * x + std::sin(th) * y) / s;
      const double b = (-std::sin(th) * x + std::cos(th) * y) / s;
      const double g = std::exp(-0.5 * (a * a + b * b / (p.slant * p.slant)));
      const cplx m = g * std::polar(1.0, p.xi * a);
      mod.push_back(m);
      env.push_back(g);
      at.emplace_back(x, y);
      sum_mod += m;
      sum_env += g;
    }
  const cplx c = sum_mod / sum_env;
  std::vector<cplx> grid(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t i = 0; i < at.size(); ++i) {
    const int x = ((at[i].first % n) + n) % n, y = ((at[i].second % n) + n) % n;
    grid[static_cast<std::size_t>(x) * n + y] += (mod[i] - c * env[i]) / (s * s);
  }
  fft2(grid, n);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_LT(std::abs(grid[i].imag()), 1e-10);
    out[i] = grid[i].real();
  }
  return out;
}

std::vector<cplx> random_stack(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = {g(rng), g(rng)};
  return v;
}

}  // namespace

TEST(SpatialBank, CountsFollowJAndL) {
  const SpatialBank bank(toy_params(4, 8));
  EXPECT_EQ(bank.n_scales(), 8);
  EXPECT_EQ(bank.size(), 8u * 8u);
  EXPECT_EQ(FilterBankParams{}.n_scales(), 20);
}

TEST(SpatialBank, ZeroMeanConstantClosedForm) {
  const double c = morlet_zero_mean_constant(3 * kPi / 4);
  EXPECT_DOUBLE_EQ(c, std::exp(-0.5 * (3 * kPi / 4) * (3 * kPi / 4)));
  EXPECT_NEAR(c, 0.0620, 1e-3);
  // Once frequency copies stop overlapping, the sampled constant is the
  // continuous one.
  const SpatialBank bank(toy_params(5, 4));
  EXPECT_NEAR(bank.zero_mean_constant(9, 1), c, 1e-12);
}

TEST(SpatialBank, EveryFilterHasZeroMean) {
  const SpatialBank bank(toy_params(5, 8));
  const int n = bank.side();
  for (int j = 0; j < bank.n_scales(); ++j)
    for (int t = 0; t < bank.n_angles(); ++t) {
      const auto f = bank.filter(j, t);
      std::vector<cplx> spatial(f.begin(), f.end());
      ifft2(spatial, n);
      double mass = 0.0;
      for (const auto& v : spatial) mass += std::abs(v);
      EXPECT_LE(std::abs(f[0]), 1e-6 * mass);
    }
}

TEST(SpatialBank, MatchesSpatialSamplingOracle) {
  const auto p = toy_params(4, 4);
  const SpatialBank bank(p);
  for (auto [j, t] : {std::pair{0, 0}, {1, 1}, {3, 2}, {5, 3}, {7, 1}}) {
    const auto want = spatial_oracle(p, j, t);
    const auto got = bank.filter(j, t);
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-10) << j << "," << t << "@" << i;
  }
}

TEST(SpatialBank, QuarterTurnAndReflectionPermuteAngles) {
  const auto p = toy_params(5, 8);
  const SpatialBank bank(p);
  const int n = bank.side(), L = p.L;
  for (int j = 0; j < bank.n_scales(); j += 3)
    for (int t = 0; t < L; ++t) {
      const auto f = bank.filter(j, t);
      const auto rot = bank.filter(j, (t + L / 2) % L);
      const auto ref = bank.filter(j, (L - t) % L);
      // Indices past L wrap to θ - π, whose response is the frequency-reversed one.
      const bool rot_wraps = t + L / 2 >= L, ref_wraps = t != 0;
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2) {
          const int m1 = (n - k1) % n, m2 = (n - k2) % n;
          // ψ̂_{θ+π/2}(ω) = ψ̂_θ(r_{-π/2} ω), ψ̂_{-θ}(ω1, ω2) = ψ̂_θ(ω1, -ω2).
          EXPECT_NEAR(rot[k1 * n + k2], rot_wraps ? f[m2 * n + k1] : f[k2 * n + m1], 1e-12);
          EXPECT_NEAR(ref[k1 * n + k2], ref_wraps ? f[m1 * n + k2] : f[k1 * n + m2], 1e-12);
        }
    }
}

TEST(SpatialBank, LittlewoodPaleyBoundsArePinned) {
  const SpatialBank bank(FilterBankParams{});
  const auto lp = littlewood_paley(bank);
  EXPECT_NEAR(lp.max_sum, 77.898744538668367, 1e-9 * 77.898744538668367);
  EXPECT_NEAR(lp.min_sum_annulus, 0.099644440663370817, 1e-9 * 77.898744538668367);
  EXPECT_GT(lp.min_sum_annulus, 0.0);
}

TEST(SpatialBank, RejectsInvalidParameters) {
  EXPECT_THROW(SpatialBank(toy_params(1, 4)), ConfigError);
  EXPECT_THROW(SpatialBank(toy_params(4, 6)), ConfigError);
  auto p = toy_params();
  p.xi = 4.0;
  EXPECT_THROW(SpatialBank{p}, ConfigError);
}

TEST(AngularBank, CountAndZeroMean) {
  const AngularBank bank(8, 3 * kPi / 4);
  EXPECT_EQ(bank.count(), 3);
  for (int ell = 0; ell < bank.count(); ++ell) {
    cplx s = 0.0;
    for (const auto& v : bank.samples(ell)) s += v;
    EXPECT_LT(std::abs(s), 1e-6);
    EXPECT_LT(std::abs(bank.filter(ell)[0]), 1e-6);
  }
  EXPECT_THROW(AngularBank(2, 1.0), ConfigError);
}

TEST(AngularBank, PeriodizationMatchesDirectSum) {
  const int L = 8;
  const double xi = 3 * kPi / 4;
  for (int ell = 0; ell < 3; ++ell) {
    const double s = std::pow(2.0, ell);
    cplx num = 0.0;
    double den = 0.0;
    for (int k = -400; k <= 400; ++k) {
      const double g = std::exp(-0.5 * (k / s) * (k / s));
      num += g * std::polar(1.0, xi * k / s);
      den += g;
    }
    const cplx c = num / den;
    const auto got = angular_filter_samples(L, ell, xi);
    for (int t = 0; t < L; ++t) {
      cplx want = 0.0;
      for (int m = -50; m <= 50; ++m) {
        const double x = (t - m * L) / s;
        want += std::exp(-0.5 * x * x) * (std::polar(1.0, xi * x) - c) / s;
      }
      EXPECT_LT(std::abs(got[t] - want), 1e-12) << ell << "," << t;
    }
  }
}

TEST(AngularBank, TruncationTailDoesNotMatter) {
  for (int ell = 0; ell < 3; ++ell) {
    const auto a = angular_filter_samples(8, ell, 3 * kPi / 4, 1e-12);
    const auto b = angular_filter_samples(8, ell, 3 * kPi / 4, 1e-16);
    for (int t = 0; t < 8; ++t) EXPECT_LT(std::abs(a[t] - b[t]), 1e-10);
  }
}

TEST(AngularBank, LittlewoodPaleyIsPinned) {
  const AngularBank bank(8, 3 * kPi / 4);
  EXPECT_NEAR(angular_littlewood_paley(bank), 6.9893568722782984, 1e-9);
}

TEST(Convolution, DeltaInputReturnsTheFilter) {
  const SpatialBank bank(toy_params(4, 4));
  const int n = bank.side();
  DensityGrid g;
  g.resolution = 4;
  g.half_width = 1.0;
  g.values.assign(n * n, 0.0);
  g.values[0] = 1.0;
  const auto stack = wavelet_transform(g, bank);
  ASSERT_EQ(stack.size(), bank.size());
  for (int j = 0; j < bank.n_scales(); ++j)
    for (int t = 0; t < bank.n_angles(); ++t) {
      const auto f = bank.filter(j, t);
      std::vector<cplx> want(f.begin(), f.end());
      ifft2(want, n);
      const auto& got = stack[j * bank.n_angles() + t];
      for (int i = 0; i < n * n; ++i) EXPECT_LT(std::abs(got[i] - want[i]), 1e-10);
    }
}

TEST(Convolution, CyclicShiftCommutes) {
  const SpatialBank bank(toy_params(4, 4));
  const int n = bank.side();
  DensityGrid g;
  g.resolution = 4;
  g.half_width = 1.0;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < n * n; ++i) g.values.push_back(u(rng));
  const auto a = wavelet_transform(g, bank);
  const auto b = wavelet_transform(cyclic_shift(g, 1, 0), bank);
  for (std::size_t s = 0; s < a.size(); ++s)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        EXPECT_LT(std::abs(b[s][((i + 1) % n) * n + k] - a[s][i * n + k]), 1e-12);
  DensityGrid zero = g;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  for (const auto& slice : wavelet_transform(zero, bank))
    for (const auto& v : slice) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Convolution, AngularMatchesDirectCircularSum) {
  const int L = 8;
  const std::size_t fibers = 5;
  const AngularBank bank(L, 3 * kPi / 4);
  const auto x = random_stack(L * fibers, 7);
  for (int ell = 0; ell < bank.count(); ++ell) {
    auto y = x;
    circular_convolve_angle(y, L, fibers, bank.filter(ell));
    const auto h = bank.samples(ell);
    for (int t = 0; t < L; ++t)
      for (std::size_t f = 0; f < fibers; ++f) {
        cplx want = 0.0;
        for (int s = 0; s < L; ++s) want += x[s * fibers + f] * h[((t - s) % L + L) % L];
        EXPECT_LT(std::abs(y[t * fibers + f] - want), 1e-12);
      }
  }
}

TEST(Convolution, AngularIdentityConstantAndShift) {
  const int L = 8;
  const std::size_t fibers = 3;
  std::vector<cplx> delta(L, 0.0);
  delta[0] = 1.0;
  fft1(delta);
  const auto x = random_stack(L * fibers, 13);
  auto y = x;
  circular_convolve_angle(y, L, fibers, delta);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(y[i] - x[i]), 1e-12);

  const AngularBank bank(L, 3 * kPi / 4);
  std::vector<cplx> flat(L * fibers, cplx(2.5, -1.0));
  circular_convolve_angle(flat, L, fibers, bank.filter(1));
  for (const auto& v : flat) EXPECT_LT(std::abs(v), 1e-10);

  // Shift by one angle before and after.
  std::vector<cplx> shifted(x.size());
  for (int t = 0; t < L; ++t)
    for (std::size_t f = 0; f < fibers; ++f) shifted[((t + 1) % L) * fibers + f] = x[t * fibers + f];
  auto a = x, b = shifted;
  circular_convolve_angle(a, L, fibers, bank.filter(2));
  circular_convolve_angle(b, L, fibers, bank.filter(2));
  for (int t = 0; t < L; ++t)
    for (std::size_t f = 0; f < fibers; ++f)
      EXPECT_LT(std::abs(b[((t + 1) % L) * fibers + f] - a[t * fibers + f]), 1e-12);
  EXPECT_THROW(circular_convolve_angle(a, 4, fibers, bank.filter(0)), ConfigError);
}
