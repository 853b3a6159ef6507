#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sctqm/ols.h"

namespace sctqm {

// Little-endian binary:
//   "SCTQM\x01" | u64 len | fingerprint | u64 D | D × (u64 len | id) |
//   u64 N | N × D float64, row-major
// Per-row metadata goes to a `<file>.rows.csv` sidecar
// (`index,source,label,deviation`, empty label when unknown).
struct FeatureCache {
  std::string fingerprint;
  FeatureMatrix matrix;
  std::vector<std::string> sources;
  std::vector<std::optional<double>> labels;
  std::vector<double> deviations;
};

void write_cache(const std::filesystem::path& path, const FeatureCache& cache);

// Throws DataError when the file is malformed or, if `expected_fingerprint`
// is given, when it does not match.
FeatureCache read_cache(const std::filesystem::path& path,
                        const std::optional<std::string>& expected_fingerprint = std::nullopt);

std::filesystem::path sidecar_path(const std::filesystem::path& cache);

}  // namespace sctqm
