#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "sctqm/coulomb.h"
#include "sctqm/errors.h"
#include "sctqm/synthetic.h"

using namespace sctqm;

namespace {

MoleculeState methanol_like() {
  return MoleculeState({{6, {0.0, 0.0, 0.0}}, {8, {1.43, 0.0, 0.0}}, {1, {-0.4, 1.0, 0.0}},
                        {1, {-0.5, -0.9, 0.3}}, {1, {1.8, 0.85, -0.1}}});
}

}  // namespace

TEST(Coulomb, HydrogenMoleculeInNativeUnits) {
  const std::vector<int> z{1, 1};
  const std::vector<std::array<double, 3>> pos{{0, 0, 0}, {1, 0, 0}};
  const auto c = coulomb_matrix_raw(z, pos, 3);
  EXPECT_DOUBLE_EQ(c.entries(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(c.entries(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(c.entries(1, 0), 1.0);
  EXPECT_EQ(c.entries.row(2).norm(), 0.0);
  EXPECT_EQ(c.k, 2);
}

TEST(Coulomb, CarbonDiagonalAndBohrConversion) {
  const MoleculeState m({{6, {0, 0, 0}}, {6, {0.529177, 0, 0}}});
  const auto c = coulomb_matrix(m, 2);
  EXPECT_NEAR(c.entries(0, 0), 36.86, 5e-3);
  EXPECT_NEAR(c.entries(0, 1), 36.0, 1e-9);
  EXPECT_THROW(coulomb_matrix(methanol_like(), 4), DataError);
}

TEST(Coulomb, SortedCopyIgnoresAtomOrder) {
  const auto m = methanol_like();
  std::vector<int> z;
  std::vector<std::array<double, 3>> pos;
  for (const auto& a : m.atoms()) z.push_back(a.z), pos.push_back(a.position);
  std::vector<int> zr(z.rbegin(), z.rend());
  std::vector<std::array<double, 3>> pr(pos.rbegin(), pos.rend());
  const auto a = random_sorted_copies(coulomb_matrix_raw(z, pos, 7), 1, 0.0, 1)[0];
  const auto b = random_sorted_copies(coulomb_matrix_raw(zr, pr, 7), 1, 0.0, 99)[0];
  EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
  for (int i = 0; i + 1 < 5; ++i) EXPECT_GE(a.row(i).norm(), a.row(i + 1).norm());
}

TEST(Coulomb, NoisyCopiesAreDeterministicPermutations) {
  const auto c = coulomb_matrix(methanol_like(), 8);
  const auto a = random_sorted_copies(c, 6, 1.0, 42), b = random_sorted_copies(c, 6, 1.0, 42);
  std::vector<double> ref(c.entries.data(), c.entries.data() + c.entries.size());
  std::sort(ref.begin(), ref.end());
  for (int q = 0; q < 6; ++q) {
    EXPECT_EQ(a[q], b[q]);
    std::vector<double> vals(a[q].data(), a[q].data() + a[q].size());
    std::sort(vals.begin(), vals.end());
    EXPECT_EQ(vals, ref);
    // Padding stays in the trailing rows and columns.
    EXPECT_EQ(a[q].bottomRows(3).cwiseAbs().sum(), 0.0);
  }
}

TEST(Coulomb, DatasetCopiesDependOnlyOnTheMolecule) {
  const auto d = make_synthetic_dataset(6, 3);
  std::vector<MoleculeState> twice{d.molecules[2], d.molecules[4], d.molecules[2]};
  const int k = max_atom_count(d.molecules);
  const auto c = coulomb_copies(twice, k, 4, 1.0, 5);
  EXPECT_EQ(c.n_molecules(), 3u);
  EXPECT_EQ(c.rows.middleRows(0, 4), c.rows.middleRows(8, 4));
  const auto alone = coulomb_copies(std::vector<MoleculeState>{d.molecules[4]}, k, 4, 1.0, 5);
  EXPECT_EQ(alone.rows, c.rows.middleRows(4, 4));
}

TEST(Kernel, DistancesAndPositiveDefiniteness) {
  const auto d = make_synthetic_dataset(12, 8);
  const auto c = coulomb_copies(d.molecules, max_atom_count(d.molecules), 2, 1.0, 1);
  const auto dist = l1_distances(c.rows, c.rows);
  for (Eigen::Index i = 0; i < dist.rows(); i += 5)
    for (Eigen::Index j = 0; j < dist.cols(); j += 3)
      EXPECT_NEAR(dist(i, j), (c.rows.row(i) - c.rows.row(j)).cwiseAbs().sum(), 1e-9);
  const Eigen::MatrixXd k = (-dist / 300.0).array().exp().matrix();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8 * eig.eigenvalues().maxCoeff());
}

TEST(Krr, SmallRidgeInterpolatesTrainingLabels) {
  const auto d = make_synthetic_dataset(10, 11);
  const int k = max_atom_count(d.molecules);
  const auto c = coulomb_copies(d.molecules, k, 1, 0.0, 1);
  std::vector<double> y;
  for (const auto& m : d.molecules) y.push_back(*m.label());
  const auto model = krr_fit(c.rows, y, 100.0, 1e-12, 1);
  for (std::size_t i = 0; i < y.size(); ++i)
    EXPECT_NEAR(krr_predict(model, c.rows.row(static_cast<Eigen::Index>(i))), y[i], 1e-6 * std::abs(y[i]));
}

TEST(Krr, DuplicateSupportWithoutRidgeIsSingular) {
  Eigen::MatrixXd s(3, 2);
  s << 1, 2, 1, 2, 0, 5;
  EXPECT_THROW(krr_fit(s, std::vector<double>{1, 1, 2}, 10.0, 0.0, 1), DataError);
  EXPECT_NO_THROW(krr_fit(s, std::vector<double>{1, 1, 2}, 10.0, 1e-3, 1));
  EXPECT_THROW(krr_fit(s, std::vector<double>{1, 1, 2}, -1.0, 1e-3, 1), ConfigError);
}

TEST(GridSearch, SinglePointAndOrderIndependence) {
  const auto d = make_synthetic_dataset(30, 4);
  const int k = max_atom_count(d.molecules);
  const auto c = coulomb_copies(d.molecules, k, 2, 1.0, 2);
  std::vector<double> y;
  for (const auto& m : d.molecules) y.push_back(*m.label());
  const auto folds = assign_folds(y, 3, 1);
  const auto dist = l1_distances(c.rows, c.rows);
  const std::vector<double> one_s{1e3}, one_l{1e-6};
  const auto r1 = grid_search(dist, y, 2, folds, one_s, one_l);
  EXPECT_EQ(r1.sigma, 1e3);
  EXPECT_EQ(r1.lambda, 1e-6);
  EXPECT_TRUE(std::isfinite(r1.mae(0, 0)));

  const std::vector<double> s{1e2, 1e3, 1e4}, l{1e-8, 1e-4, 1};
  const std::vector<double> s_rev(s.rbegin(), s.rend()), l_rev(l.rbegin(), l.rend());
  const auto a = grid_search(dist, y, 2, folds, s, l);
  const auto b = grid_search(dist, y, 2, folds, s_rev, l_rev);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_NEAR(a.mae.minCoeff(), b.mae.minCoeff(), 1e-9 * a.mae.minCoeff());
}

TEST(GridSearch, HeldOutErrorBeatsTheMean) {
  const auto d = make_synthetic_dataset(60, 19);
  const int k = max_atom_count(d.molecules);
  const auto c = coulomb_copies(d.molecules, k, 4, 1.0, 3);
  std::vector<double> y;
  for (const auto& m : d.molecules) y.push_back(*m.label());
  const auto folds = assign_folds(y, 5, 2);
  const std::vector<double> s{1e2, 1e3, 1e4, 1e5}, l{1e-10, 1e-6, 1e-2};
  const auto r = grid_search(l1_distances(c.rows, c.rows), y, 4, folds, s, l);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double baseline = 0.0;
  for (double v : y) baseline += std::abs(v - mean) / y.size();
  EXPECT_LT(r.mae.minCoeff(), 0.5 * baseline);
}
