#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sctqm/features.h"
#include "sctqm/filter_bank.h"

namespace sctqm {

struct RunConfig {
  std::filesystem::path manifest;
  Representation representation = Representation::scattering;
  int J = 0;  // 0: 9 for scattering, 10 otherwise
  int L = 8;
  double half_width = 11.0;  // a, Å
  double slant = 0.5;
  double xi = 3.0 * std::numbers::pi / 4.0;
  double planarity_tol = 0.1;  // Å
  std::vector<std::filesystem::path> profiles;
  FeatureOptions features;

  int n_folds = 5;
  std::uint64_t seed = 1;
  int m_max = 200;

  std::vector<double> sigma_grid{1e2, 3e2, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6};
  std::vector<double> lambda_grid{1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1e0};
  int krr_copies = 8;
  double krr_noise = 1.0;
  int k_max = 0;  // 0: dataset maximum

  std::filesystem::path output = "out";
  int jobs = 0;  // 0: hardware concurrency
  bool strict_planar = false;

  int resolved_J() const;
  FilterBankParams filter_params() const;
};

// `key = value` lines, `#` comments. Unknown keys and malformed values throw
// ConfigError naming the line.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
// Every key with its current value; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& c);
void validate(const RunConfig& c);

// Text covering every parameter that changes feature values, including
// profile file contents and the FFT convention.
std::string feature_fingerprint(const RunConfig& c);

}  // namespace sctqm
