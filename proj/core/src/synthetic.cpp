#include "sctqm/synthetic.h"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "sctqm/element.h"
#include "sctqm/errors.h"

namespace sctqm {
namespace {

double covalent_radius(int z) {
  const auto e = find_element(z);
  if (!e) throw DataError(fmt::format("no covalent radius for Z={}", z));
  return e->covalent_radius;
}

struct Pair {
  double well, r0;
};

Pair pair_params(int a, int b) {
  return {std::sqrt(morse_well_depth(a) * morse_well_depth(b)), covalent_radius(a) + covalent_radius(b)};
}

}  // namespace

double morse_well_depth(int z) {
  switch (z) {
    case 1: return 50.0;
    case 6: return 90.0;
    case 7: return 80.0;
    case 8: return 85.0;
    case 16: return 60.0;
    default: return 70.0;
  }
}

double synthetic_energy(const MoleculeState& m) {
  const auto atoms = m.atoms();
  double e = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k)
    for (std::size_t l = k + 1; l < atoms.size(); ++l) {
      const auto& p = atoms[k].position;
      const auto& q = atoms[l].position;
      const double r = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
      const auto [d, r0] = pair_params(atoms[k].z, atoms[l].z);
      const double x = 1.0 - std::exp(-kMorseStiffness * (r - r0));
      e += d * (x * x - 1.0);
    }
  return e;
}

std::vector<std::array<double, 3>> synthetic_energy_gradient(const MoleculeState& m) {
  const auto atoms = m.atoms();
  std::vector<std::array<double, 3>> g(atoms.size(), {0.0, 0.0, 0.0});
  for (std::size_t k = 0; k < atoms.size(); ++k)
    for (std::size_t l = k + 1; l < atoms.size(); ++l) {
      const auto& p = atoms[k].position;
      const auto& q = atoms[l].position;
      const std::array<double, 3> diff{p[0] - q[0], p[1] - q[1], p[2] - q[2]};
      const double r = std::hypot(diff[0], diff[1], diff[2]);
      const auto [d, r0] = pair_params(atoms[k].z, atoms[l].z);
      const double ex = std::exp(-kMorseStiffness * (r - r0));
      const double de_dr = 2.0 * d * (1.0 - ex) * kMorseStiffness * ex;
      for (int c = 0; c < 3; ++c) {
        g[k][c] += de_dr * diff[c] / r;
        g[l][c] -= de_dr * diff[c] / r;
      }
    }
  return g;
}

Dataset make_synthetic_dataset(int n, std::uint64_t seed, const SyntheticOptions& opts) {
  if (n < 1) throw ConfigError("synthetic dataset size must be at least 1");
  if (opts.min_heavy < 1 || opts.max_heavy < opts.min_heavy)
    throw ConfigError("invalid heavy-atom range for the synthetic dataset");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> heavy_count(opts.min_heavy, opts.max_heavy);
  std::uniform_int_distribution<int> h_count(0, opts.max_hydrogens_per_heavy);
  std::discrete_distribution<int> species({0.5, 0.2, 0.2, 0.1});
  constexpr std::array<int, 4> kHeavy{6, 7, 8, 16};

  using P2 = std::array<double, 2>;
  std::vector<P2> pts;
  std::vector<int> zs;
  auto fits = [&](std::size_t parent, int z, const P2& c) {
    const double rz = covalent_radius(z);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double r = std::hypot(pts[i][0] - c[0], pts[i][1] - c[1]);
      if (r < opts.min_distance) return false;
      if (i != parent && r < covalent_radius(zs[i]) + rz - opts.clearance) return false;
    }
    return true;
  };
  auto place = [&](std::size_t parent, int z, double lo, double hi, P2& out) {
    const P2 anchor = pts[parent];
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double r = lo + (hi - lo) * unit(rng);
      const double t = 2.0 * std::numbers::pi * unit(rng);
      const P2 c{anchor[0] + r * std::cos(t), anchor[1] + r * std::sin(t)};
      if (fits(parent, z, c)) {
        out = c;
        return true;
      }
    }
    return false;
  };

  Dataset d;
  d.name = fmt::format("synthetic-{}-{}", n, seed);
  while (static_cast<int>(d.molecules.size()) < n) {
    pts.clear();
    zs.clear();
    const int heavy = heavy_count(rng);
    pts.push_back({0.0, 0.0});
    zs.push_back(kHeavy[static_cast<std::size_t>(species(rng))]);
    bool ok = true;
    for (int i = 1; i < heavy && ok; ++i) {
      std::uniform_int_distribution<int> parent(0, i - 1);
      const int z = kHeavy[static_cast<std::size_t>(species(rng))];
      P2 c;
      ok = place(static_cast<std::size_t>(parent(rng)), z, 1.2, 1.6, c);
      if (ok) {
        pts.push_back(c);
        zs.push_back(z);
      }
    }
    for (int i = 0; i < heavy && ok; ++i) {
      const int nh = h_count(rng);
      for (int h = 0; h < nh; ++h) {
        P2 c;
        // A crowded heavy atom simply gets fewer hydrogens.
        if (!place(static_cast<std::size_t>(i), 1, 1.0, 1.1, c)) break;
        pts.push_back(c);
        zs.push_back(1);
      }
    }
    if (!ok) continue;

    P2 centroid{0.0, 0.0};
    for (const auto& p : pts) {
      centroid[0] += p[0] / static_cast<double>(pts.size());
      centroid[1] += p[1] / static_cast<double>(pts.size());
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double x = pts[i][0] - centroid[0], y = pts[i][1] - centroid[1];
      if (std::hypot(x, y) > opts.max_radius) {
        ok = false;
        break;
      }
      atoms.push_back({zs[i], {x, y, 0.0}});
    }
    if (!ok) continue;
    const auto idx = d.molecules.size();
    MoleculeState unlabeled(atoms);
    d.molecules.emplace_back(std::move(atoms), synthetic_energy(unlabeled),
                             fmt::format("synth-{:05d}", idx));
  }
  return d;
}

}  // namespace sctqm
