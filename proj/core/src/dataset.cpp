#include "sctqm/dataset.h"

#include <algorithm>
#include <limits>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {

std::vector<std::filesystem::path> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw DataError(fmt::format("cannot open manifest {}", manifest.string()));
  const auto base = manifest.parent_path();
  std::vector<std::filesystem::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::filesystem::path p(line.substr(first, last - first + 1));
    out.push_back(p.is_absolute() ? p : base / p);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& manifest) {
  Dataset d;
  d.name = manifest.stem().string();
  d.provenance = manifest;
  for (const auto& p : read_manifest(manifest)) d.molecules.push_back(read_xyz_file(p));
  return d;
}

void write_manifest(const std::filesystem::path& manifest,
                    std::span<const std::filesystem::path> entries) {
  std::ofstream out(manifest);
  if (!out) throw DataError(fmt::format("cannot write manifest {}", manifest.string()));
  for (const auto& e : entries) out << e.generic_string() << '\n';
}

std::vector<std::size_t> FoldAssignment::members(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

FoldAssignment assign_folds(std::span<const double> labels, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!std::isfinite(labels[i]))
      throw DataError(fmt::format("molecule {} has no energy label", i));

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

  FoldAssignment out;
  out.n_folds = n_folds;
  out.seed = seed;
  out.fold_of.assign(labels.size(), -1);

  std::mt19937_64 rng(seed);
  std::vector<int> slots(static_cast<std::size_t>(n_folds));
  const auto n = static_cast<std::size_t>(n_folds);
  for (std::size_t block = 0; block < order.size(); block += n) {
    std::iota(slots.begin(), slots.end(), 0);
    std::shuffle(slots.begin(), slots.end(), rng);
    // A short trailing block takes a random subset of folds.
    for (std::size_t i = block; i < std::min(block + n, order.size()); ++i)
      out.fold_of[order[i]] = slots[i - block];
  }
  return out;
}

FoldAssignment assign_folds(const Dataset& d, int n_folds, std::uint64_t seed) {
  std::vector<double> labels;
  labels.reserve(d.molecules.size());
  for (const auto& m : d.molecules)
    labels.push_back(m.label().value_or(std::numeric_limits<double>::quiet_NaN()));
  return assign_folds(labels, n_folds, seed);
}

FoldAssignment restrict_folds(const FoldAssignment& folds, std::span<const std::size_t> subset) {
  std::map<int, int> remap;
  for (auto i : subset) remap.emplace(folds.fold_of.at(i), 0);
  int next = 0;
  for (auto& [fold, id] : remap) id = next++;
  FoldAssignment out;
  out.n_folds = next;
  out.seed = folds.seed;
  out.fold_of.reserve(subset.size());
  for (auto i : subset) out.fold_of.push_back(remap.at(folds.fold_of[i]));
  return out;
}

std::string folds_to_csv(const FoldAssignment& folds) {
  std::string out = "index,fold\n";
  for (std::size_t i = 0; i < folds.fold_of.size(); ++i)
    out += fmt::format("{},{}\n", i, folds.fold_of[i]);
  return out;
}

}  // namespace sctqm
