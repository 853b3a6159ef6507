#pragma once

#include <cstdint>
#include <vector>

#include "sctqm/dataset.h"
#include "sctqm/molecule.h"

namespace sctqm {

// Pairwise Morse-like energy in kcal/mol:
//   E = Σ_{k<l} sqrt(D_k D_l) [(1 - exp(-α (r_kl - r0_kl)))² - 1]
// with r0_kl the sum of covalent radii, α = 1.5 Å⁻¹, and per-species well
// depths D (H 50, C 90, N 80, O 85, S 60; other species 70).
inline constexpr double kMorseStiffness = 1.5;
double morse_well_depth(int z);
double synthetic_energy(const MoleculeState& m);
// dE/dp_k for each atom, in canonical atom order.
std::vector<std::array<double, 3>> synthetic_energy_gradient(const MoleculeState& m);

struct SyntheticOptions {
  int min_heavy = 2;
  int max_heavy = 9;
  int max_hydrogens_per_heavy = 2;
  double min_distance = 0.9;  // Å, any pair
  // Non-bonded pairs also keep r0 - clearance apart, which stays on the
  // attractive side of every pair potential.
  double clearance = 0.3;     // Å
  double max_radius = 5.0;    // Å from the nuclear centroid
};

// Random planar molecules in the z = 0 plane, labeled with synthetic_energy.
// Heavy atoms from {C, N, O, S} grow as a tree with bonds of 1.2–1.6 Å;
// hydrogens attach at 1.0–1.1 Å. Deterministic in (n, seed).
Dataset make_synthetic_dataset(int n, std::uint64_t seed, const SyntheticOptions& opts = {});

}  // namespace sctqm
