#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sctqm/errors.h"

namespace sctqm {

struct Atom {
  int z;                          // nuclear charge, elementary-charge units
  std::array<double, 3> position; // Å
};

// Minimum allowed separation between two nuclei; closer pairs are treated as
// malformed input.
inline constexpr double kMinAtomSeparation = 0.05;  // Å

// A molecule x = {(p_k, z_k)} with an optional atomization-energy label.
// Atoms are stored in canonical order (nuclear charge, then lexicographic
// position) so that every downstream summation is independent of the order
// atoms were listed in the source file.
class MoleculeState {
 public:
  MoleculeState(std::vector<Atom> atoms, std::optional<double> label = std::nullopt,
                std::string name = {});

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  std::optional<double> label() const { return label_; }
  const std::string& name() const { return name_; }
  int total_charge() const;

 private:
  std::vector<Atom> atoms_;
  std::optional<double> label_;
  std::string name_;
};

struct PlanarAtom {
  int z;
  std::array<double, 2> position;  // Å, molecular-plane coordinates
};

// A molecule expressed in its own plane. Same invariants and canonical ordering
// as MoleculeState. `deviation` is the largest out-of-plane distance measured
// when the molecule was planarized (0 when constructed directly).
class PlanarMolecule {
 public:
  PlanarMolecule(std::vector<PlanarAtom> atoms, std::optional<double> label = std::nullopt,
                 std::string name = {}, double deviation = 0.0);

  std::span<const PlanarAtom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  std::optional<double> label() const { return label_; }
  const std::string& name() const { return name_; }
  double deviation() const { return deviation_; }
  int total_charge() const;

  // Embeds the molecule in the z = 0 plane.
  MoleculeState to_state() const;

 private:
  std::vector<PlanarAtom> atoms_;
  std::optional<double> label_;
  std::string name_;
  double deviation_;
};

class NonPlanarError : public DataError {
 public:
  NonPlanarError(const std::string& what, double deviation)
      : DataError(what), deviation_(deviation) {}
  double deviation() const { return deviation_; }

 private:
  double deviation_;
};

// Extended XYZ: atom count, comment line (optionally `energy=<kcal/mol>`),
// then one `Symbol x y z` line per atom. Extra trailing columns are ignored.
MoleculeState parse_xyz(std::string_view text, std::string name = {});
MoleculeState read_xyz_file(const std::filesystem::path& path);

// Serializes with 17 significant digits so that parse_xyz round-trips exactly.
std::string to_xyz(const MoleculeState& m, std::string_view comment = {});

// Largest distance of any atom to the total-least-squares plane.
double planarity_deviation(const MoleculeState& m);

// Projects onto the best-fit plane and recenters the nuclear centroid at the
// origin. Throws NonPlanarError when the deviation exceeds `tol`.
PlanarMolecule planarize(const MoleculeState& m, double tol);

}  // namespace sctqm
