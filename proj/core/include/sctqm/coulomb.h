#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sctqm/dataset.h"
#include "sctqm/molecule.h"

namespace sctqm {

inline constexpr double kBohrPerAngstrom = 1.0 / 0.529177;

// C_kk = ½ z_k^2.4, C_kl = z_k z_l / |p_k - p_l| (Bohr), zero-padded to k_max.
struct CoulombMatrix {
  Eigen::MatrixXd entries;
  int k = 0;
};

CoulombMatrix coulomb_matrix(const MoleculeState& m, int k_max);

// Same, with positions already in the formula's length unit.
CoulombMatrix coulomb_matrix_raw(std::span<const int> z, std::span<const std::array<double, 3>> pos,
                                 int k_max);

// P copies with rows and columns jointly sorted by descending noisy row norm.
// Noise is Gaussian with standard deviation noise_scale × (mean row norm over
// the k real rows) and is added only to those rows, so padding stays last.
std::vector<Eigen::MatrixXd> random_sorted_copies(const CoulombMatrix& c, int p, double noise_scale,
                                                  std::uint64_t seed);

// Flattened copies of a dataset, molecule i at rows [i·P, (i+1)·P). Each
// molecule's stream is seeded from `seed` and its canonical matrix, so a
// molecule gets the same copies wherever it appears.
struct CoulombCopies {
  Eigen::MatrixXd rows;
  int p = 1;
  std::size_t n_molecules() const { return static_cast<std::size_t>(rows.rows() / p); }
};

CoulombCopies coulomb_copies(std::span<const MoleculeState> molecules, int k_max, int p,
                             double noise_scale, std::uint64_t seed);
int max_atom_count(std::span<const MoleculeState> molecules);

// ‖a_i - b_j‖₁ for all row pairs.
Eigen::MatrixXd l1_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct KrrModel {
  Eigen::MatrixXd support;  // flattened augmented training copies
  Eigen::VectorXd dual;
  double sigma = 1.0;
  double lambda = 0.0;
  int p = 1;
};

// Solves (K + λI)α = y over all copies; throws DataError when the system is
// numerically singular.
KrrModel krr_fit(const Eigen::MatrixXd& support, std::span<const double> y_per_copy, double sigma,
                 double lambda, int p);
// Mean prediction over one molecule's P copies (rows of `copies`).
double krr_predict(const KrrModel& model, const Eigen::MatrixXd& copies);

struct GridSearchResult {
  double sigma = 0.0;
  double lambda = 0.0;
  Eigen::MatrixXd mae;  // [sigma][lambda], +inf where the system was singular
};

// Minimizes the mean validation MAE over folds of the given molecules. `dist`
// holds precomputed L1 distances between all copies of those molecules, with
// molecule i at rows [i·P, (i+1)·P). Ties go to the smaller σ, then the
// smaller λ.
GridSearchResult grid_search(const Eigen::MatrixXd& dist, std::span<const double> labels, int p,
                             const FoldAssignment& folds, std::span<const double> sigma_grid,
                             std::span<const double> lambda_grid);

}  // namespace sctqm
