#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sctqm/molecule.h"

namespace sctqm {

struct Dataset {
  std::vector<MoleculeState> molecules;
  std::string name;
  std::filesystem::path provenance;
};

// Manifest: UTF-8 text, one XYZ path per line. Relative paths resolve against
// the manifest's directory; blank lines and `#` comments are skipped.
std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest);
Dataset load_dataset(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest,
                    std::span<const std::filesystem::path> entries);

struct FoldAssignment {
  std::vector<int> fold_of;  // molecule index -> fold id
  int n_folds = 0;
  std::uint64_t seed = 0;

  std::vector<std::size_t> members(int fold) const;
  std::vector<std::size_t> complement(int fold) const;
};

// Energy-stratified folds: molecules are sorted by label, split into
// consecutive blocks of n_folds, and each block is dealt one molecule per
// fold in a seeded random order. Fold sizes differ by at most one.
FoldAssignment assign_folds(std::span<const double> labels, int n_folds, std::uint64_t seed);
FoldAssignment assign_folds(const Dataset& d, int n_folds, std::uint64_t seed);

// Restricts an assignment to a subset of molecules (indices into the parent),
// renumbering the folds that remain to 0..k-1 in order. Used to derive inner
// cross-validation folds.
FoldAssignment restrict_folds(const FoldAssignment& folds, std::span<const std::size_t> subset);

// CSV `index,fold`.
std::string folds_to_csv(const FoldAssignment& folds);

}  // namespace sctqm
