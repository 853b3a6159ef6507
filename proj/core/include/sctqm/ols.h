#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sctqm/dataset.h"
#include "sctqm/features.h"

namespace sctqm {

// N molecules x D features. The regression prepends its own constant column.
struct FeatureMatrix {
  Eigen::MatrixXd rows;
  std::shared_ptr<const FeatureSchema> schema;

  std::size_t n_rows() const { return static_cast<std::size_t>(rows.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(rows.cols()); }
  Eigen::VectorXd column_means() const { return rows.colwise().mean(); }
  Eigen::VectorXd column_norms() const { return rows.colwise().norm(); }
  FeatureMatrix subset(std::span<const std::size_t> row_ids) const;
};

FeatureMatrix make_feature_matrix(std::span<const FeatureVector> vectors);

// Index 0 of an augmented design is the constant column; feature k of the
// FeatureMatrix is augmented index k + 1.
inline constexpr std::size_t kConstantColumn = 0;

// Candidates whose residual squared norm drops below this fraction of their
// original squared norm are treated as linearly dependent and skipped.
inline constexpr double kDependenceThreshold = 1e-10;

enum class StopReason { reached_max, exhausted };

// Greedy orthogonal least squares path. For prefix length m the model is
// f_m(x) = Σ_{n<=m} w⊥_n φ⊥_n(x), with φ⊥ the Gram-Schmidt orthonormalization
// (over training rows) of the selected columns in selection order.
class SelectionPath {
 public:
  std::size_t size() const { return selected_.size(); }
  std::span<const std::size_t> selected() const { return selected_; }
  std::span<const double> ortho_weights() const { return weights_; }
  std::span<const double> training_rmse() const { return training_rmse_; }
  StopReason stop_reason() const { return stop_; }
  // Upper-triangular factor with augmented selected columns (unit-normalized
  // by column_scale) = Q R.
  const Eigen::MatrixXd& r_factor() const { return r_; }
  // Orthonormal training basis, N x M.
  const Eigen::MatrixXd& basis() const { return q_; }

  // Coefficients of the prefix-m model on the original (augmented, unscaled)
  // selected columns: f_m(x) = Σ_i beta_i x_{k_i}.
  Eigen::VectorXd coefficients(std::size_t m) const;
  // Predictions of the prefix-m model on rows of a FeatureMatrix.
  Eigen::VectorXd predict(const Eigen::MatrixXd& rows, std::size_t m) const;

 private:
  friend SelectionPath ols_fit(const Eigen::MatrixXd&, std::span<const double>, std::size_t);

  std::vector<std::size_t> selected_;
  std::vector<double> column_scale_;  // 1/‖column‖ for each selected column
  std::vector<double> weights_;
  std::vector<double> training_rmse_;
  Eigen::MatrixXd r_;
  Eigen::MatrixXd q_;
  StopReason stop_ = StopReason::reached_max;
};

// Requires N >= 2 and m_max <= min(N, D + 1). Selection maximizes
// |Σ_i y_i φ⊥(x_i)| over unit-normalized, orthogonalized candidates; ties go
// to the lowest column index.
SelectionPath ols_fit(const Eigen::MatrixXd& rows, std::span<const double> y, std::size_t m_max);

struct ModelOrderSelection {
  std::size_t best_m = 0;
  std::vector<double> cv_rmse;                    // mean validation RMSE, index m-1
  std::vector<std::vector<double>> fold_rmse;     // [fold][m-1]
};

// Picks M by minimizing the mean held-out RMSE over folds. Values within
// 1e-9 · rms(y) of the minimum count as ties and resolve to the smallest M.
ModelOrderSelection select_model_order(const Eigen::MatrixXd& rows, std::span<const double> y,
                                       const FoldAssignment& folds, std::size_t m_max);

struct ErrorMetrics {
  double mae = 0.0;
  double rmse = 0.0;
};

ErrorMetrics metrics(std::span<const double> predictions, std::span<const double> truths);

// Sparse linear model on named features, exported as text.
struct RegressionModel {
  std::string representation;
  std::string fingerprint;
  double offset = 0.0;                      // weight of the constant column
  std::vector<std::string> feature_ids;
  std::vector<std::size_t> feature_index;   // into the schema
  std::vector<double> weights;
  std::map<std::string, std::string> metadata;

  double predict(std::span<const double> features) const;
};

RegressionModel make_model(const SelectionPath& path, std::size_t m, const FeatureSchema& schema);
std::string model_to_text(const RegressionModel& model);
RegressionModel model_from_text(const std::string& text, const FeatureSchema& schema);

// Compensated (Neumaier) dot product, insensitive to summation order at the
// level of a few ulps.
double stable_dot(const double* a, const double* b, std::size_t n);

}  // namespace sctqm
