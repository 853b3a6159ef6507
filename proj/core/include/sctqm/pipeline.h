#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sctqm/cache.h"
#include "sctqm/config.h"
#include "sctqm/coulomb.h"
#include "sctqm/dataset.h"
#include "sctqm/ols.h"

namespace sctqm {

using Logger = std::function<void(const std::string&)>;

struct SkippedMolecule {
  std::size_t index;
  std::string name;
  double deviation;
};

struct FeaturizeResult {
  FeatureCache cache;
  std::vector<SkippedMolecule> skipped;
  std::vector<std::size_t> kept;  // dataset indices of the cache rows
};

// Planarizes, rasterizes and extracts the configured dictionary for every
// molecule on `c.jobs` worker threads. Non-planar molecules are skipped (or
// rethrown under strict_planar). Output row order follows the dataset.
FeaturizeResult featurize(const Dataset& d, const RunConfig& c, const Logger& log = {});

// One molecule, no planarity fallback.
FeatureVector featurize_one(const PlanarMolecule& m, const RunConfig& c, const FilterBank& bank,
                            const ProfileSet& profiles);

struct FoldSummary {
  int fold = 0;
  std::size_t m = 0;   // chosen model order (0 for kernel runs)
  double sigma = 0.0;  // kernel runs only
  double lambda = 0.0;
  ErrorMetrics error;
};

struct CvReport {
  std::vector<double> truth;
  std::vector<double> prediction;
  std::vector<int> fold;
  std::vector<FoldSummary> folds;
  ErrorMetrics overall;
  // Mean over outer folds of the test / training MSE of the prefix-M model,
  // index M-1. Empty for kernel runs.
  std::vector<double> decay_test_mse;
  std::vector<double> decay_train_mse;
};

// Outer cross-validation over `folds`; M is chosen on each training part by
// an inner cross-validation over the remaining folds.
CvReport cross_validate_ols(const FeatureMatrix& x, std::span<const double> y,
                            const FoldAssignment& folds, std::size_t m_max);

// Same protocol for the Coulomb baseline; the inner search selects (σ, λ).
CvReport cross_validate_krr(const CoulombCopies& copies, std::span<const double> y,
                            const FoldAssignment& folds, std::span<const double> sigma_grid,
                            std::span<const double> lambda_grid);

std::size_t median_model_order(const CvReport& r);

// report.csv, summary.csv, decay.csv under `dir`.
void write_cv_outputs(const std::filesystem::path& dir, const CvReport& r,
                      std::span<const std::string> names);

struct RunSummary {
  std::string representation;
  std::string m;  // "-" for kernel runs
  double mae = 0.0;
  double rmse = 0.0;
};

RunSummary read_run_summary(const std::filesystem::path& dir);
// Columns: representation, M, MAE, RMSE.
std::string compare_markdown(std::span<const RunSummary> runs);
std::string compare_csv(std::span<const RunSummary> runs);

}  // namespace sctqm
