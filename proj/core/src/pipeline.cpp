#include "sctqm/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {

FeatureVector featurize_one(const PlanarMolecule& m, const RunConfig& c, const FilterBank& bank,
                            const ProfileSet& profiles) {
  const auto grid = rasterize(m, profiles, c.half_width, c.resolved_J());
  switch (c.representation) {
    case Representation::fourier: return fourier_features(grid, c.features);
    case Representation::wavelet: return wavelet_features(grid, bank.spatial, c.features);
    case Representation::scattering: return scattering_features(grid, bank, c.features);
    case Representation::coulomb: break;
  }
  throw ConfigError("Coulomb matrices are not a grid dictionary");
}

FeaturizeResult featurize(const Dataset& d, const RunConfig& c, const Logger& log) {
  validate(c);
  if (c.representation == Representation::coulomb)
    throw ConfigError("the coulomb representation is computed directly by cv and has no cache");

  std::set<int> species;
  for (const auto& m : d.molecules)
    for (const auto& a : m.atoms()) species.insert(a.z);
  const std::vector<int> zs(species.begin(), species.end());
  const auto profiles = make_profile_set(zs, c.profiles);
  // Only the spatial bank is needed below the scattering dictionary.
  FilterBank bank;
  if (c.representation == Representation::scattering) bank = make_filter_bank(c.filter_params());
  else if (c.representation == Representation::wavelet) bank.spatial = make_spatial_bank(c.filter_params());

  const std::size_t n = d.molecules.size();
  std::vector<std::optional<FeatureVector>> rows(n);
  std::vector<double> deviation(n, 0.0);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& m = d.molecules[i];
      try {
        deviation[i] = planarity_deviation(m);
        const auto planar = planarize(m, c.planarity_tol);
        rows[i] = featurize_one(planar, c, bank, profiles);
      } catch (const NonPlanarError&) {
        if (c.strict_planar) errors[i] = std::current_exception();
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const auto k = ++done;
      if (log && (k % 50 == 0 || k == n)) {
        std::lock_guard lock(log_mutex);
        log(fmt::format("featurized {}/{}", k, n));
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto jobs = static_cast<std::size_t>(c.jobs > 0 ? c.jobs : static_cast<int>(hw));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < std::min(jobs, n); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  FeaturizeResult out;
  out.cache.fingerprint = feature_fingerprint(c);
  std::vector<FeatureVector> kept;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = d.molecules[i];
    if (!rows[i]) {
      out.skipped.push_back({i, m.name(), deviation[i]});
      if (log)
        log(fmt::format("skip {}: planarity deviation {:.4f} A exceeds {}", m.name(), deviation[i],
                        c.planarity_tol));
      continue;
    }
    out.kept.push_back(i);
    kept.push_back(std::move(*rows[i]));
    out.cache.sources.push_back(m.name());
    out.cache.labels.push_back(m.label());
    out.cache.deviations.push_back(deviation[i]);
  }
  if (kept.empty()) {
    out.cache.matrix.schema =
        shared_schema(c.representation, c.resolved_J(), c.L);
    out.cache.matrix.rows.resize(0, static_cast<Eigen::Index>(out.cache.matrix.schema->size()));
  } else {
    out.cache.matrix = make_feature_matrix(kept);
  }
  if (log)
    log(fmt::format("{} molecules featurized, {} skipped as non-planar", out.kept.size(),
                    out.skipped.size()));
  return out;
}

namespace {

std::pair<Eigen::MatrixXd, std::vector<double>> take_rows(const Eigen::MatrixXd& x,
                                                          std::span<const double> y,
                                                          std::span<const std::size_t> ids) {
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(ids.size()), x.cols());
  std::vector<double> ys(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(ids[i]));
    ys[i] = y[ids[i]];
  }
  return {std::move(sub), std::move(ys)};
}

void check_labels(std::size_t rows, std::span<const double> y, const FoldAssignment& folds) {
  if (rows != y.size())
    throw DataError(fmt::format("{} feature rows but {} labels", rows, y.size()));
  if (folds.fold_of.size() != y.size())
    throw DataError("fold assignment does not cover every labeled molecule");
  if (folds.n_folds < 2) throw ConfigError("cross-validation needs at least two folds");
}

void finish(CvReport& r) {
  r.overall = metrics(r.prediction, r.truth);
}

}  // namespace

CvReport cross_validate_ols(const FeatureMatrix& x, std::span<const double> y,
                            const FoldAssignment& folds, std::size_t m_max) {
  check_labels(x.n_rows(), y, folds);
  CvReport r;
  r.truth.assign(y.begin(), y.end());
  r.prediction.assign(y.size(), 0.0);
  r.fold = folds.fold_of;
  r.decay_test_mse.assign(m_max, 0.0);
  r.decay_train_mse.assign(m_max, 0.0);

  for (int f = 0; f < folds.n_folds; ++f) {
    const auto train = folds.complement(f);
    const auto test = folds.members(f);
    const auto [xt, yt] = take_rows(x.rows, y, train);
    const auto [xs, ys] = take_rows(x.rows, y, test);
    const auto inner = restrict_folds(folds, train);
    const auto cap = std::min({m_max, train.size(), x.n_features() + 1});
    const auto order = select_model_order(xt, yt, inner, cap);
    const auto path = ols_fit(xt, yt, cap);
    const std::size_t m = std::min(order.best_m, path.size());

    const auto pred = path.predict(xs, m);
    std::vector<double> pv(pred.data(), pred.data() + pred.size());
    for (std::size_t i = 0; i < test.size(); ++i) r.prediction[test[i]] = pv[i];
    r.folds.push_back({f, m, 0.0, 0.0, metrics(pv, ys)});

    for (std::size_t k = 1; k <= m_max; ++k) {
      const std::size_t mk = std::min(k, path.size());
      const auto pk = path.predict(xs, mk);
      double ss = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        const double e = pk(static_cast<Eigen::Index>(i)) - ys[i];
        ss += e * e;
      }
      const double tr = path.training_rmse()[mk - 1];
      r.decay_test_mse[k - 1] += ss / static_cast<double>(test.size()) / folds.n_folds;
      r.decay_train_mse[k - 1] += tr * tr / folds.n_folds;
    }
  }
  finish(r);
  return r;
}

CvReport cross_validate_krr(const CoulombCopies& copies, std::span<const double> y,
                            const FoldAssignment& folds, std::span<const double> sigma_grid,
                            std::span<const double> lambda_grid) {
  check_labels(copies.n_molecules(), y, folds);
  const int p = copies.p;
  const Eigen::MatrixXd dist = l1_distances(copies.rows, copies.rows);
  auto copy_rows = [p](std::span<const std::size_t> mols) {
    std::vector<Eigen::Index> rows;
    for (auto m : mols)
      for (int q = 0; q < p; ++q) rows.push_back(static_cast<Eigen::Index>(m) * p + q);
    return rows;
  };

  CvReport r;
  r.truth.assign(y.begin(), y.end());
  r.prediction.assign(y.size(), 0.0);
  r.fold = folds.fold_of;
  for (int f = 0; f < folds.n_folds; ++f) {
    const auto train = folds.complement(f);
    const auto test = folds.members(f);
    const auto inner = restrict_folds(folds, train);
    const auto tr = copy_rows(train);
    std::vector<double> yt;
    for (auto i : train) yt.push_back(y[i]);
    const auto best = grid_search(dist(tr, tr), yt, p, inner, sigma_grid, lambda_grid);

    std::vector<double> y_copies;
    for (auto i : train)
      for (int q = 0; q < p; ++q) y_copies.push_back(y[i]);
    const auto model = krr_fit(copies.rows(tr, Eigen::all), y_copies, best.sigma, best.lambda, p);
    std::vector<double> pv, ys;
    for (auto i : test) {
      const double pred =
          krr_predict(model, copies.rows.middleRows(static_cast<Eigen::Index>(i) * p, p));
      r.prediction[i] = pred;
      pv.push_back(pred);
      ys.push_back(y[i]);
    }
    r.folds.push_back({f, 0, best.sigma, best.lambda, metrics(pv, ys)});
  }
  finish(r);
  return r;
}

std::size_t median_model_order(const CvReport& r) {
  std::vector<std::size_t> ms;
  for (const auto& f : r.folds) ms.push_back(f.m);
  if (ms.empty()) return 0;
  std::sort(ms.begin(), ms.end());
  return ms[(ms.size() - 1) / 2];
}

void write_cv_outputs(const std::filesystem::path& dir, const CvReport& r,
                      std::span<const std::string> names) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv");
    out << "index,name,fold,truth,prediction,abs_error\n";
    for (std::size_t i = 0; i < r.truth.size(); ++i)
      out << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", i, i < names.size() ? names[i] : "",
                         r.fold[i], r.truth[i], r.prediction[i],
                         std::abs(r.prediction[i] - r.truth[i]));
  }
  {
    const bool kernel = !r.folds.empty() && r.folds.front().m == 0;
    std::ofstream out(dir / "summary.csv");
    out << "fold,M,MAE,RMSE,sigma,lambda\n";
    for (const auto& f : r.folds)
      out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", f.fold,
                         kernel ? std::string("-") : std::to_string(f.m), f.error.mae, f.error.rmse,
                         f.sigma, f.lambda);
    out << fmt::format("all,{},{:.17g},{:.17g},,\n",
                       kernel ? std::string("-") : std::to_string(median_model_order(r)),
                       r.overall.mae, r.overall.rmse);
  }
  if (!r.decay_test_mse.empty()) {
    std::ofstream out(dir / "decay.csv");
    out << "M,log2_M,half_log2_test_mse,half_log2_train_mse\n";
    for (std::size_t k = 0; k < r.decay_test_mse.size(); ++k)
      out << fmt::format("{},{:.17g},{:.17g},{:.17g}\n", k + 1, std::log2(static_cast<double>(k + 1)),
                         0.5 * std::log2(r.decay_test_mse[k]), 0.5 * std::log2(r.decay_train_mse[k]));
  }
}

RunSummary read_run_summary(const std::filesystem::path& dir) {
  const auto cfg_path = dir / "run.cfg";
  const auto summary_path = dir / "summary.csv";
  if (!std::filesystem::exists(cfg_path) || !std::filesystem::exists(summary_path))
    throw DataError(fmt::format("{} is not a completed run (needs run.cfg and summary.csv)",
                                dir.string()));
  RunSummary s;
  s.representation = std::string(to_string(load_config(cfg_path).representation));
  std::ifstream in(summary_path);
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (!line.starts_with("all,")) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() < 4) break;
    s.m = f[1];
    s.mae = std::stod(f[2]);
    s.rmse = std::stod(f[3]);
    found = true;
  }
  if (!found) throw DataError(fmt::format("{} has no overall row", summary_path.string()));
  return s;
}

std::string compare_markdown(std::span<const RunSummary> runs) {
  std::string out = "| Representation | M | MAE | RMSE |\n|---|---:|---:|---:|\n";
  for (const auto& r : runs)
    out += fmt::format("| {} | {} | {:.2f} | {:.2f} |\n", r.representation, r.m, r.mae, r.rmse);
  return out;
}

std::string compare_csv(std::span<const RunSummary> runs) {
  std::string out = "representation,M,MAE,RMSE\n";
  for (const auto& r : runs)
    out += fmt::format("{},{},{:.17g},{:.17g}\n", r.representation, r.m, r.mae, r.rmse);
  return out;
}

}  // namespace sctqm
