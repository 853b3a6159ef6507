#include "sctqm/filter_bank.h"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Gaussian terms below e^{-40} are dropped from the periodization sums.
constexpr double kExponentCutoff = 40.0;

struct MorletSums {
  std::vector<double> modulated;  // Σ_m exp(-((v1-ξ)² + ζ² v2²)/2)
  std::vector<double> envelope;   // Σ_m exp(-(v1² + ζ² v2²)/2)
};

MorletSums periodized_morlet(const FilterBankParams& p, int j, int theta) {
  const int n = p.side();
  const double s = std::pow(2.0, scale_value(j));
  const double angle = theta * std::numbers::pi / p.L;
  const double c = std::cos(angle), sn = std::sin(angle);
  const double z2 = p.slant * p.slant;
  const double radius = (p.xi + std::sqrt(2.0 * kExponentCutoff / std::min(1.0, z2))) / s;
  const double r2 = radius * radius;

  MorletSums out;
  out.modulated.assign(static_cast<std::size_t>(n) * n, 0.0);
  out.envelope.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int k1 = 0; k1 < n; ++k1) {
    const double w1 = kTwoPi * signed_frequency(k1, n) / n;
    const int m1_lo = static_cast<int>(std::ceil((-radius - w1) / kTwoPi));
    const int m1_hi = static_cast<int>(std::floor((radius - w1) / kTwoPi));
    for (int k2 = 0; k2 < n; ++k2) {
      const double w2 = kTwoPi * signed_frequency(k2, n) / n;
      double gm = 0.0, ge = 0.0;
      for (int m1 = m1_lo; m1 <= m1_hi; ++m1) {
        const double a1 = w1 + kTwoPi * m1;
        const double rest = r2 - a1 * a1;
        if (rest < 0) continue;
        const double span = std::sqrt(rest);
        const int m2_lo = static_cast<int>(std::ceil((-span - w2) / kTwoPi));
        const int m2_hi = static_cast<int>(std::floor((span - w2) / kTwoPi));
        for (int m2 = m2_lo; m2 <= m2_hi; ++m2) {
          const double a2 = w2 + kTwoPi * m2;
          const double v1 = s * (c * a1 + sn * a2);
          const double v2 = s * (-sn * a1 + c * a2);
          gm += std::exp(-0.5 * ((v1 - p.xi) * (v1 - p.xi) + z2 * v2 * v2));
          ge += std::exp(-0.5 * (v1 * v1 + z2 * v2 * v2));
        }
      }
      out.modulated[static_cast<std::size_t>(k1) * n + k2] = gm;
      out.envelope[static_cast<std::size_t>(k1) * n + k2] = ge;
    }
  }
  return out;
}

}  // namespace

int FilterBankParams::n_angular() const {
  int count = 0;
  for (int l = L; l > 1; l >>= 1) ++count;
  return count;
}

void FilterBankParams::validate() const {
  if (J < 2 || J > 12) throw ConfigError(fmt::format("J must be in [2, 12], got {}", J));
  if (L < 2 || !is_power_of_two(L))
    throw ConfigError(fmt::format("L must be a power of two >= 2, got {}", L));
  if (!(slant > 0)) throw ConfigError("slant must be positive");
  if (!(xi > 0) || !(xi < std::numbers::pi)) throw ConfigError("xi must lie in (0, π)");
  if (!(angular_xi > 0)) throw ConfigError("angular xi must be positive");
}

SpatialBank::SpatialBank(const FilterBankParams& params) : params_(params) {
  params_.validate();
  const double norm = kTwoPi * params_.slant;
  for (int j = 0; j < n_scales(); ++j) {
    for (int t = 0; t < n_angles(); ++t) {
      auto sums = periodized_morlet(params_, j, t);
      const double c = sums.modulated[0] / sums.envelope[0];
      std::vector<double> hat(sums.modulated.size());
      for (std::size_t i = 0; i < hat.size(); ++i)
        hat[i] = norm * (sums.modulated[i] - c * sums.envelope[i]);
      hat[0] = 0.0;
      filters_.push_back(std::move(hat));
      constants_.push_back(c);
    }
  }
}

std::span<const double> SpatialBank::filter(int j, int theta) const {
  return filters_.at(static_cast<std::size_t>(j * n_angles() + theta));
}

double SpatialBank::zero_mean_constant(int j, int theta) const {
  return constants_.at(static_cast<std::size_t>(j * n_angles() + theta));
}

std::vector<cplx> angular_filter_samples(int L, int ell, double xi, double tail) {
  const double scale = std::pow(2.0, ell);
  const double xmax = std::sqrt(-2.0 * std::log(tail));
  const long nmax = static_cast<long>(std::ceil(xmax * scale));

  double sum_env = 0.0;
  cplx sum_mod = 0.0;
  for (long k = -nmax; k <= nmax; ++k) {
    const double x = k / scale;
    if (std::abs(x) > xmax) continue;
    const double g = std::exp(-0.5 * x * x);
    sum_env += g;
    sum_mod += g * std::polar(1.0, xi * x);
  }
  // Real by symmetry of the sample set.
  const double c = sum_mod.real() / sum_env;

  std::vector<cplx> out(static_cast<std::size_t>(L), 0.0);
  for (long k = -nmax; k <= nmax; ++k) {
    const double x = k / scale;
    if (std::abs(x) > xmax) continue;
    const double g = std::exp(-0.5 * x * x);
    const auto t = static_cast<std::size_t>(((k % L) + L) % L);
    out[t] += g * (std::polar(1.0, xi * x) - c) / scale;
  }
  return out;
}

AngularBank::AngularBank(int L, double xi) : length_(L) {
  if (L < 4 || !is_power_of_two(L))
    throw ConfigError(fmt::format("angular bank needs L a power of two >= 4, got {}", L));
  for (int ell = 0; (2 << ell) <= L; ++ell) {
    auto samples = angular_filter_samples(L, ell, xi);
    std::vector<cplx> hat = samples;
    fft1(hat);
    samples_.push_back(std::move(samples));
    hats_.push_back(std::move(hat));
  }
}

SpatialBank make_spatial_bank(const FilterBankParams& params) { return SpatialBank(params); }

AngularBank make_angular_bank(int L, double xi) { return AngularBank(L, xi); }

FilterBank make_filter_bank(const FilterBankParams& params) {
  FilterBank bank{params, SpatialBank(params), {}};
  if (params.L >= 4) bank.angular = AngularBank(params.L, params.angular_xi);
  return bank;
}

LittlewoodPaley littlewood_paley(const SpatialBank& bank) {
  const int n = bank.side();
  std::vector<double> sum(static_cast<std::size_t>(n) * n, 0.0);
  for (int j = 0; j < bank.n_scales(); ++j)
    for (int t = 0; t < bank.n_angles(); ++t) {
      const auto f = bank.filter(j, t);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += f[i] * f[i];
    }
  LittlewoodPaley lp{0.0, std::numeric_limits<double>::infinity()};
  const double lo = 2.0 * kTwoPi / n, hi = std::numbers::pi / 2.0;
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2) {
      const double v = sum[static_cast<std::size_t>(k1) * n + k2];
      lp.max_sum = std::max(lp.max_sum, v);
      const double r = kTwoPi * std::hypot(signed_frequency(k1, n), signed_frequency(k2, n)) / n;
      if (r >= lo && r <= hi) lp.min_sum_annulus = std::min(lp.min_sum_annulus, v);
    }
  return lp;
}

double angular_littlewood_paley(const AngularBank& bank) {
  double best = 0.0;
  for (int m = 0; m < bank.length(); ++m) {
    double s = 0.0;
    for (int ell = 0; ell < bank.count(); ++ell)
      s += std::norm(bank.filter(ell)[static_cast<std::size_t>(m)]);
    best = std::max(best, s);
  }
  return best;
}

std::vector<cplx> real_spectrum(std::span<const double> values, int n) {
  std::vector<cplx> out(values.begin(), values.end());
  fft2(out, n);
  return out;
}

std::vector<cplx> grid_spectrum(const DensityGrid& g) { return real_spectrum(g.values, g.side()); }

void convolve_hat(std::span<const cplx> signal_hat, std::span<const double> filter_hat,
                  std::span<cplx> out, int n) {
  const auto total = static_cast<std::size_t>(n) * n;
  if (signal_hat.size() != total || filter_hat.size() != total || out.size() != total)
    throw ConfigError("convolution size mismatch between signal and filter bank");
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) out[i] = signal_hat[i] * (filter_hat[i] * scale);
  ifft2_unscaled(out, n);
}

std::vector<std::vector<cplx>> wavelet_transform(const DensityGrid& g, const SpatialBank& bank) {
  if (g.side() != bank.side())
    throw ConfigError(fmt::format("grid side {} does not match filter bank side {}", g.side(),
                                  bank.side()));
  const auto hat = grid_spectrum(g);
  const int n = g.side();
  std::vector<std::vector<cplx>> out;
  out.reserve(bank.size());
  for (int j = 0; j < bank.n_scales(); ++j)
    for (int t = 0; t < bank.n_angles(); ++t) {
      std::vector<cplx> slice(hat.size());
      convolve_hat(hat, bank.filter(j, t), slice, n);
      out.push_back(std::move(slice));
    }
  return out;
}

void circular_convolve_angle(std::span<cplx> stack, int L, std::size_t fiber_count,
                             std::span<const cplx> filter_hat) {
  if (filter_hat.size() != static_cast<std::size_t>(L) ||
      stack.size() != static_cast<std::size_t>(L) * fiber_count)
    throw ConfigError("angular axis length does not match the angular filter");
  const int count = static_cast<int>(fiber_count);
  fft_batch(stack, L, count, count, 1);
  for (int t = 0; t < L; ++t) {
    const cplx h = filter_hat[static_cast<std::size_t>(t)] / static_cast<double>(L);
    auto row = stack.subspan(static_cast<std::size_t>(t) * fiber_count, fiber_count);
    for (auto& v : row) v = mul(v, h);
  }
  ifft_batch_unscaled(stack, L, count, count, 1);
}

}  // namespace sctqm
