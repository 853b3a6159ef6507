#include "sctqm/features.h"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {
namespace {

// std::abs on complex goes through hypot, which dominates the second layer.
inline double magnitude(cplx v) { return std::sqrt(v.real() * v.real() + v.imag() * v.imag()); }

}  // namespace

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::fourier: return "fourier";
    case Representation::wavelet: return "wavelet";
    case Representation::scattering: return "scattering";
    case Representation::coulomb: return "coulomb";
  }
  return "?";
}

Representation parse_representation(std::string_view s) {
  if (s == "fourier") return Representation::fourier;
  if (s == "wavelet") return Representation::wavelet;
  if (s == "scattering") return Representation::scattering;
  if (s == "coulomb") return Representation::coulomb;
  throw ConfigError(fmt::format("unknown representation '{}'", s));
}

std::string format_scale(int j) {
  return j % 2 == 0 ? fmt::format("{}", j / 2) : fmt::format("{}.5", j / 2);
}

std::size_t fourier_size(int J) { return 1 + 3 * (std::size_t{1} << (J - 1)); }

std::size_t wavelet_size(int J) { return 1 + 6 * static_cast<std::size_t>(J); }

std::size_t scattering_size(int J, int L) {
  const std::size_t scales = 2 * static_cast<std::size_t>(J);
  const std::size_t log2l = static_cast<std::size_t>(FilterBankParams{J, L}.n_angular());
  return wavelet_size(J) + 3 * (scales * (scales - 1) / 2) * static_cast<std::size_t>(L) * log2l;
}

FeatureSchema fourier_schema(int J) {
  const int radii = 1 << (J - 1);
  FeatureSchema s{"F:phi0"};
  for (const char* p : {"p1", "p1sq", "p2"})
    for (int g = 1; g <= radii; ++g) s.push_back(fmt::format("F:{}:g={}", p, g));
  return s;
}

FeatureSchema wavelet_schema(int J) {
  FeatureSchema s{"W:phi0"};
  for (const char* p : {"p1", "p1sq", "p2"})
    for (int j = 0; j < 2 * J; ++j) s.push_back(fmt::format("W:{}:j={}", p, format_scale(j)));
  return s;
}

FeatureSchema scattering_schema(int J, int L) {
  FeatureSchema s = wavelet_schema(J);
  const int scales = 2 * J;
  const int n_ell = FilterBankParams{J, L}.n_angular();
  s.reserve(scattering_size(J, L));
  for (int j1 = 0; j1 < scales; ++j1)
    for (int j2 = j1 + 1; j2 < scales; ++j2)
      for (int d = 0; d < L; ++d)
        for (int ell = 0; ell < n_ell; ++ell)
          for (const char* p : {"p1", "p1sq", "p2"})
            s.push_back(fmt::format("S:{}:j1={}:j2={}:a={}:l2={}", p, format_scale(j1),
                                    format_scale(j2), d, ell));
  return s;
}

std::shared_ptr<const FeatureSchema> shared_schema(Representation r, int J, int L) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const FeatureSchema>> memo;
  const auto key = std::make_tuple(static_cast<int>(r), J, r == Representation::scattering ? L : 0);
  std::lock_guard lock(mu);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::shared_ptr<const FeatureSchema> schema;
  switch (r) {
    case Representation::fourier: schema = std::make_shared<FeatureSchema>(fourier_schema(J)); break;
    case Representation::wavelet: schema = std::make_shared<FeatureSchema>(wavelet_schema(J)); break;
    case Representation::scattering:
      schema = std::make_shared<FeatureSchema>(scattering_schema(J, L));
      break;
    case Representation::coulomb: throw ConfigError("coulomb features have no fixed schema");
  }
  memo.emplace(key, schema);
  return schema;
}

FeatureVector fourier_features(const DensityGrid& g, const FeatureOptions& opts) {
  const int n = g.side();
  const int radii = n / 2;
  const double area = g.spacing() * g.spacing();
  const auto hat = grid_spectrum(g);

  std::vector<double> sum1(static_cast<std::size_t>(radii) + 1, 0.0);
  std::vector<double> sum2(sum1.size(), 0.0);
  std::vector<long> count(sum1.size(), 0);
  for (int k1 = 0; k1 < n; ++k1) {
    const int f1 = signed_frequency(k1, n);
    for (int k2 = 0; k2 < n; ++k2) {
      const int f2 = signed_frequency(k2, n);
      const auto bin = std::lround(std::sqrt(static_cast<double>(f1 * f1 + f2 * f2)));
      if (bin < 1 || bin > radii) continue;
      const double mag = magnitude(hat[static_cast<std::size_t>(k1) * n + k2]) * area;
      sum1[static_cast<std::size_t>(bin)] += mag;
      sum2[static_cast<std::size_t>(bin)] += mag * mag;
      ++count[static_cast<std::size_t>(bin)];
    }
  }

  FeatureVector out;
  out.schema = shared_schema(Representation::fourier, g.resolution, 0);
  out.values.reserve(fourier_size(g.resolution));
  out.values.push_back(g.integral());
  std::vector<double> p1(static_cast<std::size_t>(radii)), p2(p1.size());
  for (int b = 1; b <= radii; ++b) {
    const auto i = static_cast<std::size_t>(b);
    const double w = opts.fourier_bin_mean ? 1.0 / static_cast<double>(count[i]) : 1.0;
    p1[i - 1] = sum1[i] * w;
    p2[i - 1] = sum2[i] * w;
  }
  out.values.insert(out.values.end(), p1.begin(), p1.end());
  for (double v : p1) out.values.push_back(v * v);
  out.values.insert(out.values.end(), p2.begin(), p2.end());
  return out;
}

namespace {

struct Moments {
  double l1 = 0.0;
  double l2 = 0.0;
};

void emit_triplets(std::vector<double>& values, const std::vector<Moments>& acc) {
  for (const auto& m : acc) values.push_back(m.l1);
  for (const auto& m : acc) values.push_back(m.l1 * m.l1);
  for (const auto& m : acc) values.push_back(m.l2);
}

void check_bank(const DensityGrid& g, const SpatialBank& bank) {
  if (g.side() != bank.side())
    throw ConfigError(fmt::format("grid side {} does not match filter bank side {}", g.side(),
                                  bank.side()));
}

double pooling_weight(const DensityGrid& g, int L, const FeatureOptions& opts) {
  return opts.measure_weights ? g.spacing() * g.spacing() * std::numbers::pi / L : 1.0;
}

}  // namespace

FeatureVector wavelet_features(const DensityGrid& g, const SpatialBank& bank,
                               const FeatureOptions& opts) {
  check_bank(g, bank);
  const int n = g.side();
  const auto hat = grid_spectrum(g);
  std::vector<cplx> slice(hat.size());
  std::vector<Moments> acc(static_cast<std::size_t>(bank.n_scales()));
  for (int j = 0; j < bank.n_scales(); ++j) {
    for (int t = 0; t < bank.n_angles(); ++t) {
      convolve_hat(hat, bank.filter(j, t), slice, n);
      for (const auto& v : slice) {
        const double m = magnitude(v);
        acc[static_cast<std::size_t>(j)].l1 += m;
        acc[static_cast<std::size_t>(j)].l2 += m * m;
      }
    }
  }
  const double w = pooling_weight(g, bank.n_angles(), opts);
  for (auto& m : acc) {
    m.l1 *= w;
    m.l2 *= w;
  }
  FeatureVector out;
  out.schema = shared_schema(Representation::wavelet, g.resolution, 0);
  out.values.push_back(g.integral());
  emit_triplets(out.values, acc);
  return out;
}

namespace {

// Spectra of the first-layer moduli |ρ ⋆ ψ_{j1,θ1}| for all θ1, [θ1][k].
std::vector<cplx> first_layer_spectra(std::span<const cplx> rho_hat, const SpatialBank& bank,
                                      int j1, Moments* first_order) {
  const int n = bank.side();
  const int L = bank.n_angles();
  const auto nn = static_cast<std::size_t>(n) * n;
  std::vector<cplx> out(nn * static_cast<std::size_t>(L));
  for (int t1 = 0; t1 < L; ++t1) {
    auto u1 = std::span<cplx>(out).subspan(static_cast<std::size_t>(t1) * nn, nn);
    convolve_hat(rho_hat, bank.filter(j1, t1), u1, n);
    for (auto& v : u1) {
      const double m = magnitude(v);
      if (first_order) {
        first_order->l1 += m;
        first_order->l2 += m * m;
      }
      v = m;
    }
    fft2(u1, n);
  }
  return out;
}

// Z[θ1][u] = (U1(θ1) ⋆ ψ_{j2,θ2})(u) for every θ1.
void spatial_second_layer(std::span<const cplx> u1_hat, std::span<const double> filter,
                          std::span<cplx> z, int n, int L) {
  const auto nn = static_cast<std::size_t>(n) * n;
  for (int t1 = 0; t1 < L; ++t1)
    convolve_hat(u1_hat.subspan(static_cast<std::size_t>(t1) * nn, nn), filter,
                 z.subspan(static_cast<std::size_t>(t1) * nn, nn), n);
}

// Angular spectrum of conj(Z) from that of Z: F[z*](m) = F[z](-m)*.
void conjugate_angular_spectrum(std::span<const cplx> zhat, std::span<cplx> out, int L,
                                std::size_t nn) {
  for (int m = 0; m < L; ++m) {
    const auto src = zhat.subspan(static_cast<std::size_t>((L - m) % L) * nn, nn);
    auto dst = out.subspan(static_cast<std::size_t>(m) * nn, nn);
    for (std::size_t i = 0; i < nn; ++i) dst[i] = std::conj(src[i]);
  }
}

void apply_angular_filter(std::span<const cplx> zhat, std::span<const cplx> filter_hat,
                          std::span<cplx> out, int L, std::size_t nn) {
  for (int m = 0; m < L; ++m) {
    const cplx h = filter_hat[static_cast<std::size_t>(m)] / static_cast<double>(L);
    const auto src = zhat.subspan(static_cast<std::size_t>(m) * nn, nn);
    auto dst = out.subspan(static_cast<std::size_t>(m) * nn, nn);
    for (std::size_t i = 0; i < nn; ++i) dst[i] = mul(src[i], h);
  }
  const int count = static_cast<int>(nn);
  ifft_batch_unscaled(out, L, count, count, 1);
}

}  // namespace

FeatureVector scattering_features(const DensityGrid& g, const FilterBank& bank,
                                  const FeatureOptions& opts) {
  const auto& spatial = bank.spatial;
  check_bank(g, spatial);
  if (bank.angular.count() == 0) throw ConfigError("scattering needs an angular bank (L >= 4)");
  const int n = g.side();
  const int L = spatial.n_angles();
  const int scales = spatial.n_scales();
  const int n_ell = bank.angular.count();
  const auto nn = static_cast<std::size_t>(n) * n;
  const int count = static_cast<int>(nn);

  const auto rho_hat = grid_spectrum(g);
  std::vector<Moments> first(static_cast<std::size_t>(scales));
  std::vector<Moments> second;
  second.reserve(static_cast<std::size_t>(scales * (scales - 1) / 2 * L * n_ell));

  std::vector<cplx> z(nn * static_cast<std::size_t>(L));
  std::vector<cplx> zhat_conj(z.size());
  std::vector<cplx> w(z.size());

  for (int j1 = 0; j1 < scales; ++j1) {
    const auto u1_hat = first_layer_spectra(rho_hat, spatial, j1, &first[static_cast<std::size_t>(j1)]);
    for (int j2 = j1 + 1; j2 < scales; ++j2) {
      std::vector<Moments> acc(static_cast<std::size_t>(L * n_ell));
      for (int t2 = 0; t2 < L; ++t2) {
        spatial_second_layer(u1_hat, spatial.filter(j2, t2), z, n, L);
        fft_batch(z, L, count, count, 1);
        conjugate_angular_spectrum(z, zhat_conj, L, nn);
        // θ2 and θ2 + π share the difference class d = θ1 - θ2 mod L.
        for (const auto* zh : {&z, &zhat_conj}) {
          for (int ell = 0; ell < n_ell; ++ell) {
            apply_angular_filter(*zh, bank.angular.filter(ell), w, L, nn);
            for (int t1 = 0; t1 < L; ++t1) {
              const int d = ((t1 - t2) % L + L) % L;
              auto& m = acc[static_cast<std::size_t>(d * n_ell + ell)];
              const auto row = std::span<const cplx>(w).subspan(static_cast<std::size_t>(t1) * nn, nn);
              double s1 = 0.0, s2 = 0.0;
              for (const auto& v : row) {
                const double a = magnitude(v);
                s1 += a;
                s2 += a * a;
              }
              m.l1 += s1;
              m.l2 += s2;
            }
          }
        }
      }
      second.insert(second.end(), acc.begin(), acc.end());
    }
  }

  const double wgt = pooling_weight(g, L, opts);
  FeatureVector out;
  out.schema = shared_schema(Representation::scattering, g.resolution, L);
  out.values.reserve(scattering_size(g.resolution, L));
  out.values.push_back(g.integral());
  for (auto& m : first) {
    m.l1 *= wgt;
    m.l2 *= wgt;
  }
  emit_triplets(out.values, first);
  for (const auto& m : second) {
    const double l1 = m.l1 * wgt;
    out.values.push_back(l1);
    out.values.push_back(l1 * l1);
    out.values.push_back(m.l2 * wgt);
  }
  return out;
}

std::vector<double> scattering_second_layer(const DensityGrid& g, const FilterBank& bank, int j1,
                                            int j2, int ell, bool angular_first) {
  const auto& spatial = bank.spatial;
  check_bank(g, spatial);
  const int n = g.side();
  const int L = spatial.n_angles();
  const auto nn = static_cast<std::size_t>(n) * n;
  const int count = static_cast<int>(nn);
  const auto rho_hat = grid_spectrum(g);
  auto u1_hat = first_layer_spectra(rho_hat, spatial, j1, nullptr);

  std::vector<double> out(static_cast<std::size_t>(L) * 2 * L * nn);
  const auto store = [&](int t1, int t2, std::span<const cplx> vals) {
    auto dst = std::span<double>(out).subspan((static_cast<std::size_t>(t1) * 2 * L + t2) * nn, nn);
    for (std::size_t i = 0; i < nn; ++i) dst[i] = magnitude(vals[i]);
  };

  std::vector<cplx> z(nn * static_cast<std::size_t>(L));
  if (!angular_first) {
    std::vector<cplx> zc(z.size()), w(z.size());
    for (int t2 = 0; t2 < L; ++t2) {
      spatial_second_layer(u1_hat, spatial.filter(j2, t2), z, n, L);
      fft_batch(z, L, count, count, 1);
      conjugate_angular_spectrum(z, zc, L, nn);
      apply_angular_filter(z, bank.angular.filter(ell), w, L, nn);
      for (int t1 = 0; t1 < L; ++t1) store(t1, t2, std::span<const cplx>(w).subspan(static_cast<std::size_t>(t1) * nn, nn));
      apply_angular_filter(zc, bank.angular.filter(ell), w, L, nn);
      for (int t1 = 0; t1 < L; ++t1)
        store(t1, t2 + L, std::span<const cplx>(w).subspan(static_cast<std::size_t>(t1) * nn, nn));
    }
    return out;
  }

  // Angular convolution of the first layer (spectra are linear, so filter
  // them along θ1 directly), then the spatial transform. The θ2 + π filter is
  // the frequency-reversed θ2 filter.
  circular_convolve_angle(u1_hat, L, nn, bank.angular.filter(ell));
  std::vector<double> reversed(nn);
  for (int t2 = 0; t2 < 2 * L; ++t2) {
    auto f = spatial.filter(j2, t2 % L);
    std::span<const double> filter = f;
    if (t2 >= L) {
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
          reversed[static_cast<std::size_t>(k1) * n + k2] =
              f[static_cast<std::size_t>((n - k1) % n) * n + (n - k2) % n];
      filter = reversed;
    }
    spatial_second_layer(u1_hat, filter, z, n, L);
    for (int t1 = 0; t1 < L; ++t1) store(t1, t2, std::span<const cplx>(z).subspan(static_cast<std::size_t>(t1) * nn, nn));
  }
  return out;
}

}  // namespace sctqm
