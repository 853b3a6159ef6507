#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "sctqm/errors.h"
#include "sctqm/pipeline.h"
#include "sctqm/synthetic.h"

using namespace sctqm;
namespace fs = std::filesystem;

namespace {

RunConfig wavelet_config() {
  RunConfig c;
  c.representation = Representation::wavelet;
  c.J = 6;
  c.L = 4;
  c.jobs = 1;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Featurize, SkipsNonPlanarMoleculesUnlessStrict) {
  auto d = make_synthetic_dataset(4, 1);
  d.molecules.insert(d.molecules.begin() + 2,
                     parse_xyz("4\nenergy=-1\nC 0 0 0\nH 1 0 0\nH 0 1 0\nH 0 0 1\n", "pyramid"));
  auto c = wavelet_config();
  std::vector<std::string> log;
  const auto r = featurize(d, c, [&](const std::string& s) { log.push_back(s); });
  EXPECT_EQ(r.kept, (std::vector<std::size_t>{0, 1, 3, 4}));
  ASSERT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].name, "pyramid");
  EXPECT_GT(r.skipped[0].deviation, 0.1);
  EXPECT_EQ(r.cache.matrix.n_rows(), 4u);
  EXPECT_EQ(r.cache.matrix.n_features(), wavelet_size(6));
  EXPECT_EQ(r.cache.sources[2], d.molecules[3].name());
  EXPECT_FALSE(log.empty());
  c.strict_planar = true;
  EXPECT_THROW(featurize(d, c), NonPlanarError);
}

TEST(Featurize, ThreadCountDoesNotChangeResults) {
  const auto d = make_synthetic_dataset(7, 2);
  auto c = wavelet_config();
  const auto a = featurize(d, c);
  c.jobs = 3;
  const auto b = featurize(d, c);
  EXPECT_EQ(a.cache.matrix.rows, b.cache.matrix.rows);
  EXPECT_EQ(a.cache.fingerprint, b.cache.fingerprint);
}

TEST(Featurize, AtomOrderDoesNotChangeFeatures) {
  const auto m = make_synthetic_dataset(1, 8).molecules[0];
  std::vector<Atom> reversed(m.atoms().rbegin(), m.atoms().rend());
  Dataset d;
  d.molecules = {m, MoleculeState(reversed, m.label(), "reversed")};
  auto c = wavelet_config();
  c.representation = Representation::scattering;
  const auto r = featurize(d, c);
  EXPECT_EQ(r.cache.matrix.rows.row(0), r.cache.matrix.rows.row(1));
}

TEST(Featurize, CoulombHasNoCache) {
  RunConfig c;
  c.representation = Representation::coulomb;
  EXPECT_THROW(featurize(make_synthetic_dataset(2, 1), c), ConfigError);
}

TEST(CrossValidation, LinearTargetIsRecoveredWithinNoise) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  const int n = 120, dim = 30;
  FeatureMatrix x;
  x.rows.resize(n, dim);
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) x.rows(i, k) = g(rng);
    y[i] = 10.0 + 3.0 * x.rows(i, 2) - 2.0 * x.rows(i, 11) + x.rows(i, 20) + 0.2 * g(rng);
  }
  const auto folds = assign_folds(y, 5, 1);
  const auto r = cross_validate_ols(x, y, folds, 20);
  ASSERT_EQ(r.folds.size(), 5u);
  ASSERT_EQ(r.prediction.size(), static_cast<std::size_t>(n));
  EXPECT_LT(r.overall.rmse, 1.5 * 0.2);
  for (const auto& f : r.folds) {
    EXPECT_GE(f.m, 4u);
    EXPECT_LE(f.m, 10u);
  }
  const auto m = median_model_order(r);
  EXPECT_GE(m, 4u);
  ASSERT_EQ(r.decay_train_mse.size(), 20u);
  for (std::size_t k = 1; k < r.decay_train_mse.size(); ++k)
    EXPECT_LE(r.decay_train_mse[k], r.decay_train_mse[k - 1] * (1 + 1e-12));
  for (std::size_t i = 0; i < r.truth.size(); ++i) EXPECT_EQ(r.truth[i], y[i]);
}

TEST(CrossValidation, KernelBaselineReportsItsHyperparameters) {
  const auto d = make_synthetic_dataset(40, 6);
  std::vector<double> y;
  for (const auto& m : d.molecules) y.push_back(*m.label());
  const auto copies = coulomb_copies(d.molecules, max_atom_count(d.molecules), 2, 1.0, 1);
  const std::vector<double> s{1e3, 1e4}, l{1e-8, 1e-2};
  const auto r = cross_validate_krr(copies, y, assign_folds(y, 4, 1), s, l);
  ASSERT_EQ(r.folds.size(), 4u);
  for (const auto& f : r.folds) {
    EXPECT_EQ(f.m, 0u);
    EXPECT_TRUE(f.sigma == 1e3 || f.sigma == 1e4);
    EXPECT_TRUE(f.lambda == 1e-8 || f.lambda == 1e-2);
  }
  EXPECT_TRUE(r.decay_test_mse.empty());
  EXPECT_GT(r.overall.mae, 0.0);
}

TEST(Outputs, WrittenRunsCanBeCompared) {
  const auto root = fs::temp_directory_path() / "sctqm_test_outputs";
  fs::remove_all(root);
  CvReport r;
  r.truth = {1, 2, 3, 4};
  r.prediction = {1.5, 2, 2, 4};
  r.fold = {0, 1, 0, 1};
  r.folds = {{0, 3, 0, 0, {0.75, 0.79}}, {1, 5, 0, 0, {0, 0}}};
  r.overall = metrics(r.prediction, r.truth);
  r.decay_test_mse = {4, 1, 0.25};
  r.decay_train_mse = {4, 0.5, 0.1};
  const std::vector<std::string> names{"a", "b", "c", "d"};
  auto c = wavelet_config();
  write_cv_outputs(root / "w", r, names);
  std::ofstream(root / "w" / "run.cfg") << dump_config(c);

  CvReport k = r;
  k.folds = {{0, 0, 1e3, 1e-6, {1, 1}}, {1, 0, 1e4, 1e-6, {2, 2}}};
  k.decay_test_mse.clear();
  c.representation = Representation::coulomb;
  write_cv_outputs(root / "k", k, names);
  std::ofstream(root / "k" / "run.cfg") << dump_config(c);

  EXPECT_EQ(slurp(root / "w" / "summary.csv").substr(0, 29), "fold,M,MAE,RMSE,sigma,lambda\n");
  EXPECT_TRUE(slurp(root / "w" / "decay.csv").starts_with("M,log2_M,half_log2_test_mse,half_log2_train_mse\n1,0,1,1\n"));
  EXPECT_FALSE(fs::exists(root / "k" / "decay.csv"));
  EXPECT_TRUE(slurp(root / "w" / "report.csv").starts_with("index,name,fold,truth,prediction,abs_error\n0,a,0,"));

  const std::vector<RunSummary> runs{read_run_summary(root / "w"), read_run_summary(root / "k")};
  EXPECT_EQ(runs[0].representation, "wavelet");
  EXPECT_EQ(runs[0].m, "3");
  EXPECT_EQ(runs[1].m, "-");
  EXPECT_DOUBLE_EQ(runs[0].mae, r.overall.mae);
  const auto csv = compare_csv(runs);
  EXPECT_TRUE(csv.starts_with("representation,M,MAE,RMSE\nwavelet,3,"));
  EXPECT_NE(compare_markdown(runs).find("| coulomb | - |"), std::string::npos);
  EXPECT_THROW(read_run_summary(root / "missing"), DataError);
}
