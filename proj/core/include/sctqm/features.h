#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "sctqm/density.h"
#include "sctqm/filter_bank.h"

namespace sctqm {

enum class Representation { fourier, wavelet, scattering, coulomb };

std::string_view to_string(Representation r);
Representation parse_representation(std::string_view s);  // throws ConfigError

// Ordered feature identifiers, e.g. `F:p1:g=17`, `W:p2:j=3.5`,
// `S:p1sq:j1=0.5:j2=3:a=2:l2=1`. A pure function of (family, J, L).
using FeatureSchema = std::vector<std::string>;

struct FeatureVector {
  std::vector<double> values;
  std::shared_ptr<const FeatureSchema> schema;
};

// Constant factors that the source leaves open; both are fingerprinted.
struct FeatureOptions {
  bool fourier_bin_mean = true;  // annulus mean (true) or sum (false)
  bool measure_weights = true;   // pool with Δ²·π/L (true) or raw sums (false)
};

// "3.5" for j = 7, "3" for j = 6.
std::string format_scale(int j);

std::size_t fourier_size(int J);                 // 1 + 3·2^{J-1}
std::size_t wavelet_size(int J);                 // 1 + 6J
std::size_t scattering_size(int J, int L);       // 1 + 6J + 3·(2J(2J-1)/2)·L·log2 L

FeatureSchema fourier_schema(int J);
FeatureSchema wavelet_schema(int J);
FeatureSchema scattering_schema(int J, int L);
// Memoized, shared between feature vectors.
std::shared_ptr<const FeatureSchema> shared_schema(Representation r, int J, int L);

// φ_0 = Σ g Δ², then per annulus radius γ = 1..2^{J-1} (nearest-integer
// binning of |k|): mean |ĝ|, its square, and mean |ĝ|², with ĝ = Δ²·fft2(g).
FeatureVector fourier_features(const DensityGrid& g, const FeatureOptions& opts = {});

// φ_0, then for each of the 2J scales the pooled L¹ norm of |ρ ⋆ ψ_{j,θ}(u)|
// over (u, θ), its square, and the pooled squared L² norm.
FeatureVector wavelet_features(const DensityGrid& g, const SpatialBank& bank,
                               const FeatureOptions& opts = {});

// Wavelet dictionary followed by second-order coefficients
//   W(u, θ1, θ2) = | (|ρ ⋆ ψ_{j1,·}| ⋆ ψ_{j2,θ2})(u) ⊛ ψ̄_ℓ2 (θ1) |
// for j2 > j1, pooled over u and over all θ2 on the full circle (2L samples,
// the second half being conjugates) at fixed difference d = θ1 - θ2 mod L.
// Each (j1, j2, d, ℓ2) contributes L¹, squared L¹, and squared L² terms.
FeatureVector scattering_features(const DensityGrid& g, const FilterBank& bank,
                                  const FeatureOptions& opts = {});

// Second-layer modulus tensor for one (j1, j2, ℓ2), laid out
// [θ1][θ2][u] with θ2 in 0..2L-1. When `angular_first` is set the angular
// convolution is applied to the first layer before the spatial one.
std::vector<double> scattering_second_layer(const DensityGrid& g, const FilterBank& bank, int j1,
                                            int j2, int ell, bool angular_first = false);

}  // namespace sctqm
