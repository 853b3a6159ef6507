#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sctqm/molecule.h"

namespace sctqm {

// Spherically symmetric isolated-atom density rho3d(r), e/Å^3, tabulated on a
// strictly increasing radial grid starting at r = 0.
struct AtomicRadialProfile {
  std::string species;
  int z = 0;
  std::vector<double> r;      // Å
  std::vector<double> rho3d;  // e/Å^3

  double r_max() const { return r.empty() ? 0.0 : r.back(); }
  // 4π ∫ r² rho3d dr by the trapezoidal rule.
  double charge() const;
};

// Planar density condensed from a 3D profile, rho2d(r) in e/Å^2.
struct RadialProfile2D {
  std::string species;
  int z = 0;
  std::vector<double> r;
  std::vector<double> rho2d;

  double r_max() const { return r.empty() ? 0.0 : r.back(); }
  // 2π ∫ r rho2d dr by the trapezoidal rule.
  double charge() const;
  // Linear interpolation of the table; zero beyond r_max.
  double operator()(double radius) const;
};

// Slater decay q (1/Å) used by default_profile: kSlaterDecayScale / r_cov.
inline constexpr double kSlaterDecayScale = 2.5;

// Analytic Slater density rho3d(r) = z q³/(8π) exp(-q r), tabulated until the
// enclosed charge reaches 0.9995 z.
AtomicRadialProfile default_profile(const std::string& species);
AtomicRadialProfile slater_profile(const std::string& species, int z, double decay);

// Validates the contract of AtomicRadialProfile (monotone grid from 0,
// non-negative density, charge within 1e-3 of z). Throws DataError.
void validate_profile(const AtomicRadialProfile& p);

// Profile file: header `# species=<symbol> z=<int>`, optional `r,rho3d` line,
// then `r,rho3d` rows.
AtomicRadialProfile load_profile_csv(const std::filesystem::path& path);
std::string profile_to_csv(const AtomicRadialProfile& p);

// A spherical shell of radius r and width dr carries 4π r² rho3d dr; placing
// that charge on the annulus of the same radius and width (area 2π r dr)
// gives rho2d(r) = 2 r rho3d(r). The planar integral is preserved exactly.
RadialProfile2D condense_3d_to_2d(const AtomicRadialProfile& p);

using ProfileSet = std::map<int, RadialProfile2D>;  // keyed by nuclear charge

// Condensed default profiles for every species in `zs`, with file overrides
// taking precedence.
ProfileSet make_profile_set(std::span<const int> zs,
                            std::span<const std::filesystem::path> override_files = {});

// 2^J x 2^J sampling of the approximate planar density on [-a, a]^2.
// values[ix * n + iy], cell centers at (i + 1/2 - n/2) * delta.
struct DensityGrid {
  int resolution = 0;      // J
  double half_width = 0;   // a, Å
  std::vector<double> values;
  double raw_charge = 0;   // discrete integral before rescaling

  int side() const { return 1 << resolution; }
  double spacing() const { return 2.0 * half_width / side(); }
  double cell_center(int i) const { return (i + 0.5 - side() / 2) * spacing(); }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * side() + iy]; }
  // Σ values · Δ²
  double integral() const;
};

// Rasterizes Σ_k rho2d_{a(k)}(|u - p_k|) at cell centers, then rescales so the
// discrete integral equals Σ z_k. Every atom must sit at least the largest
// profile support inside the box.
DensityGrid rasterize(const PlanarMolecule& m, const ProfileSet& profiles, double half_width,
                      int resolution);

// Grid rotated by +90° about the origin: out(u) = in(R^{-1} u).
DensityGrid rotate90(const DensityGrid& g);
// Reflection across the first axis: out(x, y) = in(x, -y).
DensityGrid reflect_y(const DensityGrid& g);
// Cyclic shift by (sx, sy) cells.
DensityGrid cyclic_shift(const DensityGrid& g, int sx, int sy);

}  // namespace sctqm
