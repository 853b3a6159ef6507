#include "sctqm/ols.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {

double stable_dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double term = a[i] * b[i];
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      comp += (sum - t) + term;
    else
      comp += (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> row_ids) const {
  FeatureMatrix out;
  out.schema = schema;
  out.rows.resize(static_cast<Eigen::Index>(row_ids.size()), rows.cols());
  for (std::size_t i = 0; i < row_ids.size(); ++i)
    out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(row_ids[i]));
  return out;
}

FeatureMatrix make_feature_matrix(std::span<const FeatureVector> vectors) {
  FeatureMatrix out;
  if (vectors.empty()) return out;
  out.schema = vectors.front().schema;
  const auto d = vectors.front().values.size();
  out.rows.resize(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != d)
      throw DataError(fmt::format("feature vector {} has {} entries, expected {}", i,
                                  vectors[i].values.size(), d));
    for (std::size_t k = 0; k < d; ++k)
      out.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = vectors[i].values[k];
  }
  return out;
}

SelectionPath ols_fit(const Eigen::MatrixXd& rows, std::span<const double> y, std::size_t m_max) {
  const auto n = static_cast<std::size_t>(rows.rows());
  const auto d = static_cast<std::size_t>(rows.cols()) + 1;
  if (n < 2) throw DataError("regression needs at least two training rows");
  if (y.size() != n)
    throw DataError(fmt::format("{} targets for {} feature rows", y.size(), n));
  if (m_max == 0 || m_max > std::min(n, d))
    throw ConfigError(fmt::format("M_max = {} must lie in [1, min(N, D+1) = {}]", m_max,
                                  std::min(n, d)));
  for (double v : y)
    if (!std::isfinite(v)) throw DataError("non-finite regression target");
  if (!rows.allFinite()) throw DataError("non-finite feature value");

  // Residual candidates, unit-normalized, column-major so each is contiguous.
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  c.col(0).setOnes();
  c.rightCols(static_cast<Eigen::Index>(d - 1)) = rows;
  std::vector<double> scale(d, 0.0);
  std::vector<char> active(d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    const double* col = c.col(static_cast<Eigen::Index>(k)).data();
    const double nrm = std::sqrt(stable_dot(col, col, n));
    if (nrm > 0.0 && std::isfinite(nrm)) {
      scale[k] = 1.0 / nrm;
      c.col(static_cast<Eigen::Index>(k)) *= scale[k];
      active[k] = 1;
    }
  }

  SelectionPath path;
  path.q_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m_max));
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_max),
                                                   static_cast<Eigen::Index>(d));
  std::vector<double> residual(y.begin(), y.end());

  for (std::size_t m = 0; m < m_max; ++m) {
    std::size_t best = d;
    double best_score = -1.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (!active[k]) continue;
      const double* col = c.col(static_cast<Eigen::Index>(k)).data();
      const double nrm2 = stable_dot(col, col, n);
      if (nrm2 < kDependenceThreshold) {
        active[k] = 0;
        continue;
      }
      const double score = std::abs(stable_dot(y.data(), col, n)) / std::sqrt(nrm2);
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best == d) {
      path.stop_ = StopReason::exhausted;
      break;
    }
    active[best] = 0;

    auto q = path.q_.col(static_cast<Eigen::Index>(m));
    q = c.col(static_cast<Eigen::Index>(best));
    // A second Gram-Schmidt pass keeps the basis orthonormal on long paths.
    for (std::size_t p = 0; p < m; ++p) {
      const double delta = stable_dot(path.q_.col(static_cast<Eigen::Index>(p)).data(), q.data(), n);
      q -= delta * path.q_.col(static_cast<Eigen::Index>(p));
      coupling(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(best)) += delta;
    }
    const double nrm = std::sqrt(stable_dot(q.data(), q.data(), n));
    q /= nrm;
    coupling(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(best)) = nrm;

    const double w = stable_dot(y.data(), q.data(), n);
    path.selected_.push_back(best);
    path.column_scale_.push_back(scale[best]);
    path.weights_.push_back(w);

    for (std::size_t k = 0; k < d; ++k) {
      if (!active[k]) continue;
      auto col = c.col(static_cast<Eigen::Index>(k));
      const double proj = stable_dot(q.data(), col.data(), n);
      coupling(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = proj;
      col -= proj * q;
    }

    for (std::size_t i = 0; i < n; ++i) residual[i] -= w * q(static_cast<Eigen::Index>(i));
    path.training_rmse_.push_back(
        std::sqrt(stable_dot(residual.data(), residual.data(), n) / static_cast<double>(n)));
  }

  const auto mm = static_cast<Eigen::Index>(path.selected_.size());
  path.q_.conservativeResize(Eigen::NoChange, mm);
  path.r_ = Eigen::MatrixXd::Zero(mm, mm);
  for (Eigen::Index col = 0; col < mm; ++col)
    for (Eigen::Index row = 0; row <= col; ++row)
      path.r_(row, col) = coupling(row, static_cast<Eigen::Index>(path.selected_[col]));
  return path;
}

Eigen::VectorXd SelectionPath::coefficients(std::size_t m) const {
  if (m == 0 || m > size())
    throw ConfigError(fmt::format("model order {} outside path of length {}", m, size()));
  const auto mm = static_cast<Eigen::Index>(m);
  Eigen::VectorXd w(mm);
  for (Eigen::Index i = 0; i < mm; ++i) w(i) = weights_[static_cast<std::size_t>(i)];
  Eigen::VectorXd beta =
      r_.topLeftCorner(mm, mm).triangularView<Eigen::Upper>().solve(w);
  for (Eigen::Index i = 0; i < mm; ++i) beta(i) *= column_scale_[static_cast<std::size_t>(i)];
  return beta;
}

Eigen::VectorXd SelectionPath::predict(const Eigen::MatrixXd& rows, std::size_t m) const {
  const Eigen::VectorXd beta = coefficients(m);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows.rows());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = selected_[i];
    if (k == kConstantColumn)
      out.array() += beta(static_cast<Eigen::Index>(i));
    else
      out += beta(static_cast<Eigen::Index>(i)) * rows.col(static_cast<Eigen::Index>(k - 1));
  }
  return out;
}

ModelOrderSelection select_model_order(const Eigen::MatrixXd& rows, std::span<const double> y,
                                       const FoldAssignment& folds, std::size_t m_max) {
  if (folds.n_folds < 2) throw ConfigError("model order selection needs at least two folds");
  if (folds.fold_of.size() != y.size())
    throw DataError("fold assignment does not match the number of targets");
  ModelOrderSelection out;
  out.cv_rmse.assign(m_max, 0.0);

  for (int f = 0; f < folds.n_folds; ++f) {
    const auto train = folds.complement(f);
    const auto val = folds.members(f);
    if (train.size() < 2 || val.empty())
      throw DataError(fmt::format("fold {} leaves too few rows for training or validation", f));
    Eigen::MatrixXd xt(static_cast<Eigen::Index>(train.size()), rows.cols());
    std::vector<double> yt(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      xt.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(train[i]));
      yt[i] = y[train[i]];
    }
    Eigen::MatrixXd xv(static_cast<Eigen::Index>(val.size()), rows.cols());
    for (std::size_t i = 0; i < val.size(); ++i)
      xv.row(static_cast<Eigen::Index>(i)) = rows.row(static_cast<Eigen::Index>(val[i]));

    const std::size_t cap = std::min({m_max, train.size(), static_cast<std::size_t>(rows.cols()) + 1});
    const auto path = ols_fit(xt, yt, cap);
    std::vector<double> curve(m_max);
    for (std::size_t m = 1; m <= m_max; ++m) {
      const auto pred = path.predict(xv, std::min(m, path.size()));
      double ss = 0.0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        const double e = pred(static_cast<Eigen::Index>(i)) - y[val[i]];
        ss += e * e;
      }
      curve[m - 1] = std::sqrt(ss / static_cast<double>(val.size()));
      out.cv_rmse[m - 1] += curve[m - 1] / folds.n_folds;
    }
    out.fold_rmse.push_back(std::move(curve));
  }

  double rms_y = 0.0;
  for (double v : y) rms_y += v * v;
  rms_y = std::sqrt(rms_y / static_cast<double>(y.size()));
  const double best = *std::min_element(out.cv_rmse.begin(), out.cv_rmse.end());
  const double tol = 1e-9 * rms_y;
  for (std::size_t m = 0; m < m_max; ++m)
    if (out.cv_rmse[m] <= best + tol) {
      out.best_m = m + 1;
      break;
    }
  return out;
}

ErrorMetrics metrics(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || truths.empty())
    throw DataError("metrics need equally sized, non-empty prediction and truth vectors");
  ErrorMetrics e;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double d = predictions[i] - truths[i];
    e.mae += std::abs(d);
    e.rmse += d * d;
  }
  e.mae /= static_cast<double>(truths.size());
  e.rmse = std::sqrt(e.rmse / static_cast<double>(truths.size()));
  return e;
}

double RegressionModel::predict(std::span<const double> features) const {
  double f = offset;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (feature_index[i] >= features.size())
      throw DataError(fmt::format("model feature {} outside a vector of {} entries",
                                  feature_ids[i], features.size()));
    f += weights[i] * features[feature_index[i]];
  }
  return f;
}

RegressionModel make_model(const SelectionPath& path, std::size_t m, const FeatureSchema& schema) {
  const auto beta = path.coefficients(m);
  RegressionModel model;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = path.selected()[i];
    if (k == kConstantColumn) {
      model.offset += beta(static_cast<Eigen::Index>(i));
      continue;
    }
    if (k - 1 >= schema.size()) throw DataError("selected column outside the feature schema");
    model.feature_ids.push_back(schema[k - 1]);
    model.feature_index.push_back(k - 1);
    model.weights.push_back(beta(static_cast<Eigen::Index>(i)));
  }
  model.metadata["M"] = std::to_string(m);
  return model;
}

std::string model_to_text(const RegressionModel& model) {
  std::string out = "# sctqm linear model\nschema_version = 1\n";
  out += fmt::format("representation = {}\n", model.representation);
  out += fmt::format("fingerprint = {}\n", model.fingerprint);
  for (const auto& [k, v] : model.metadata) out += fmt::format("meta.{} = {}\n", k, v);
  out += fmt::format("offset = {:.17g}\n", model.offset);
  out += fmt::format("terms = {}\n", model.weights.size());
  for (std::size_t i = 0; i < model.weights.size(); ++i)
    out += fmt::format("{} {:.17g}\n", model.feature_ids[i], model.weights[i]);
  return out;
}

namespace {

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ParseError(fmt::format("bad number '{}' at line {}", s, line), line);
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

RegressionModel model_from_text(const std::string& text, const FeatureSchema& schema) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < schema.size(); ++i) index.emplace(schema[i], i);

  RegressionModel model;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  long expected_terms = -1;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    if (const auto eq = s.find(" = "); eq != std::string::npos) {
      const std::string key = s.substr(0, eq), value = s.substr(eq + 3);
      if (key == "schema_version") {
        if (value != "1") throw ParseError(fmt::format("unsupported model version {}", value), line);
      } else if (key == "representation") {
        model.representation = value;
      } else if (key == "fingerprint") {
        model.fingerprint = value;
      } else if (key == "offset") {
        model.offset = parse_double(value, line);
      } else if (key == "terms") {
        expected_terms = static_cast<long>(parse_double(value, line));
      } else if (key.starts_with("meta.")) {
        model.metadata[key.substr(5)] = value;
      } else {
        throw ParseError(fmt::format("unknown model key '{}' at line {}", key, line), line);
      }
      continue;
    }
    const auto sp = s.find(' ');
    if (sp == std::string::npos)
      throw ParseError(fmt::format("malformed model term at line {}", line), line);
    const std::string id = s.substr(0, sp);
    const auto it = index.find(id);
    if (it == index.end())
      throw DataError(fmt::format("model feature {} is not in the current schema", id));
    model.feature_ids.push_back(id);
    model.feature_index.push_back(it->second);
    model.weights.push_back(parse_double(trim(s.substr(sp + 1)), line));
  }
  if (expected_terms >= 0 && static_cast<std::size_t>(expected_terms) != model.weights.size())
    throw ParseError(fmt::format("model declares {} terms but lists {}", expected_terms,
                                 model.weights.size()),
                     line);
  return model;
}

}  // namespace sctqm
