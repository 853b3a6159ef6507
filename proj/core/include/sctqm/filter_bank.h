#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "sctqm/density.h"
#include "sctqm/fft.h"

namespace sctqm {

struct FilterBankParams {
  int J = 10;                                 // grid side 2^J, 2J spatial scales
  int L = 8;                                  // angles θ = kπ/L, k = 0..L-1
  double slant = 0.5;                         // ζ
  double xi = 3.0 * std::numbers::pi / 4.0;   // central frequency, rad/sample
  double angular_xi = 3.0 * std::numbers::pi / 4.0;

  int side() const { return 1 << J; }
  int n_scales() const { return 2 * J; }
  int n_angular() const;                      // log2(L)
  void validate() const;                      // throws ConfigError
};

// Closed-form Morlet constant making the continuous wavelet integrate to zero.
inline double morlet_zero_mean_constant(double xi) { return std::exp(-0.5 * xi * xi); }

// Scale index j (half-octave steps) to its value j/2, e.g. 7 -> 3.5.
inline double scale_value(int j) { return 0.5 * j; }

// Frequency responses of ψ_{j,θ}(u) = 2^{-j} ψ(2^{-j/2} r_{-θ} u) for
// j = 0..2J-1 and θ = kπ/L, sampled on the 2^J x 2^J DFT grid. The Morlet
// transform is real (ψ(-u) = ψ*(u)), so responses are stored as reals.
// Each response is 2π-periodized (equivalently, the wavelet is sampled on the
// integer grid) and carries its own zero-mean constant so that the DC bin is
// exactly zero; the lattice is closed under 90° rotation and reflection.
class SpatialBank {
 public:
  SpatialBank() = default;
  explicit SpatialBank(const FilterBankParams& params);

  const FilterBankParams& params() const { return params_; }
  int side() const { return params_.side(); }
  int n_scales() const { return params_.n_scales(); }
  int n_angles() const { return params_.L; }
  std::size_t size() const { return filters_.size(); }

  std::span<const double> filter(int j, int theta) const;
  double zero_mean_constant(int j, int theta) const;

 private:
  FilterBankParams params_;
  std::vector<std::vector<double>> filters_;  // [j * L + theta][k1 * n + k2]
  std::vector<double> constants_;
};

// Periodic angular wavelets ψ̄_ℓ on the L-sample circle (period π, sample
// units), ℓ = 0..log2(L)-1:
//   ψ̄_ℓ[t] = 2^{-ℓ} Σ_k ψ1D(2^{-ℓ}(t - kL)),  ψ1D(x) = e^{-x²/2}(e^{i ξ_a x} - C_ℓ)
// with C_ℓ chosen so the sampled filter sums to zero.
class AngularBank {
 public:
  AngularBank() = default;
  AngularBank(int L, double xi);

  int length() const { return length_; }
  int count() const { return static_cast<int>(hats_.size()); }
  std::span<const cplx> samples(int ell) const { return samples_.at(static_cast<std::size_t>(ell)); }
  std::span<const cplx> filter(int ell) const { return hats_.at(static_cast<std::size_t>(ell)); }

 private:
  int length_ = 0;
  std::vector<std::vector<cplx>> samples_;
  std::vector<std::vector<cplx>> hats_;
};

// Circle samples of the periodized dilated 1D Morlet; terms with Gaussian
// envelope below `tail` are dropped from the periodization sum.
std::vector<cplx> angular_filter_samples(int L, int ell, double xi, double tail = 1e-13);

struct FilterBank {
  FilterBankParams params;
  SpatialBank spatial;
  AngularBank angular;  // empty when L < 4
};

SpatialBank make_spatial_bank(const FilterBankParams& params);
AngularBank make_angular_bank(int L, double xi);
FilterBank make_filter_bank(const FilterBankParams& params);

// Max and min over frequencies of Σ_{j,θ} |ψ̂_{j,θ}(ω)|²; the min is taken
// over the annulus 2·(2π/2^J) <= |ω| <= π/2.
struct LittlewoodPaley {
  double max_sum;
  double min_sum_annulus;
};
LittlewoodPaley littlewood_paley(const SpatialBank& bank);

// Max over angular frequencies of Σ_ℓ |ψ̄̂_ℓ(m)|².
double angular_littlewood_paley(const AngularBank& bank);

// fft2 of a real grid, as complex values.
std::vector<cplx> grid_spectrum(const DensityGrid& g);
std::vector<cplx> real_spectrum(std::span<const double> values, int n);

// out = ifft2(signal_hat ⊙ filter_hat): circular convolution with one filter.
void convolve_hat(std::span<const cplx> signal_hat, std::span<const double> filter_hat,
                  std::span<cplx> out, int n);

// All (j, θ) slices ρ ⋆ ψ_{j,θ}, indexed [j * L + θ]. Holds the whole stack in
// memory; feature extractors stream instead.
std::vector<std::vector<cplx>> wavelet_transform(const DensityGrid& g, const SpatialBank& bank);

// Length-L circular convolution along the leading (θ1) axis of a stack laid
// out as [θ1][fiber], fiber_count values per angle, in place.
void circular_convolve_angle(std::span<cplx> stack, int L, std::size_t fiber_count,
                             std::span<const cplx> filter_hat);

}  // namespace sctqm
