#include "sctqm/coulomb.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {
namespace {

constexpr double kSingularRatio = 1e-13;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

void require_square(const Eigen::MatrixXd& d, std::size_t n, const char* what) {
  if (d.rows() != d.cols() || static_cast<std::size_t>(d.rows()) != n)
    throw DataError(fmt::format("{}: distance matrix is {}x{}, expected {}x{}", what, d.rows(),
                                d.cols(), n, n));
}

}  // namespace

CoulombMatrix coulomb_matrix_raw(std::span<const int> z, std::span<const std::array<double, 3>> pos,
                                 int k_max) {
  const int k = static_cast<int>(z.size());
  if (k > k_max)
    throw DataError(fmt::format("molecule has {} atoms but the Coulomb matrix holds {}", k, k_max));
  CoulombMatrix c{Eigen::MatrixXd::Zero(k_max, k_max), k};
  for (int a = 0; a < k; ++a) {
    c.entries(a, a) = 0.5 * std::pow(static_cast<double>(z[a]), 2.4);
    for (int b = a + 1; b < k; ++b) {
      const double r = std::hypot(pos[a][0] - pos[b][0], pos[a][1] - pos[b][1], pos[a][2] - pos[b][2]);
      const double v = z[a] * z[b] / r;
      c.entries(a, b) = v;
      c.entries(b, a) = v;
    }
  }
  return c;
}

CoulombMatrix coulomb_matrix(const MoleculeState& m, int k_max) {
  std::vector<int> z;
  std::vector<std::array<double, 3>> pos;
  for (const auto& a : m.atoms()) {
    z.push_back(a.z);
    pos.push_back({a.position[0] * kBohrPerAngstrom, a.position[1] * kBohrPerAngstrom,
                   a.position[2] * kBohrPerAngstrom});
  }
  return coulomb_matrix_raw(z, pos, k_max);
}

std::vector<Eigen::MatrixXd> random_sorted_copies(const CoulombMatrix& c, int p, double noise_scale,
                                                  std::uint64_t seed) {
  if (p < 1) throw ConfigError("need at least one sorted copy");
  if (noise_scale < 0) throw ConfigError("noise scale must be non-negative");
  const int k = c.k;
  std::vector<double> norms(static_cast<std::size_t>(k));
  double mean = 0.0;
  for (int i = 0; i < k; ++i) {
    norms[i] = c.entries.row(i).norm();
    mean += norms[i];
  }
  if (k > 0) mean /= k;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = static_cast<int>(c.entries.rows());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(static_cast<std::size_t>(p));
  for (int copy = 0; copy < p; ++copy) {
    std::vector<double> noisy = norms;
    if (noise_scale > 0)
      for (auto& v : noisy) v += noise_scale * mean * gauss(rng);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.begin() + k,
                     [&](int a, int b) { return noisy[a] > noisy[b]; });
    Eigen::MatrixXd m(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) = c.entries(order[a], order[b]);
    out.push_back(std::move(m));
  }
  return out;
}

int max_atom_count(std::span<const MoleculeState> molecules) {
  int k = 0;
  for (const auto& m : molecules) k = std::max(k, static_cast<int>(m.size()));
  return k;
}

CoulombCopies coulomb_copies(std::span<const MoleculeState> molecules, int k_max, int p,
                             double noise_scale, std::uint64_t seed) {
  CoulombCopies out;
  out.p = p;
  out.rows.resize(static_cast<Eigen::Index>(molecules.size()) * p,
                  static_cast<Eigen::Index>(k_max) * k_max);
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    const auto c = coulomb_matrix(molecules[i], k_max);
    const std::uint64_t s =
        fnv1a(c.entries.data(), sizeof(double) * static_cast<std::size_t>(c.entries.size()),
              fnv1a(&seed, sizeof(seed)));
    const auto copies = random_sorted_copies(c, p, noise_scale, s);
    for (int q = 0; q < p; ++q)
      out.rows.row(static_cast<Eigen::Index>(i) * p + q) =
          copies[static_cast<std::size_t>(q)].reshaped().transpose();
  }
  return out;
}

Eigen::MatrixXd l1_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw DataError("L1 distances need matching feature widths");
  // Transposed so that each copy is a contiguous column.
  const Eigen::MatrixXd at = a.transpose(), bt = b.transpose();
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, j) = (at.col(i) - bt.col(j)).cwiseAbs().sum();
  return d;
}

KrrModel krr_fit(const Eigen::MatrixXd& support, std::span<const double> y_per_copy, double sigma,
                 double lambda, int p) {
  if (!(sigma > 0)) throw ConfigError("kernel width must be positive");
  if (lambda < 0) throw ConfigError("ridge parameter must be non-negative");
  if (static_cast<std::size_t>(support.rows()) != y_per_copy.size())
    throw DataError("one label per augmented copy is required");
  Eigen::MatrixXd k = (-l1_distances(support, support) / sigma).array().exp().matrix();
  k.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kSingularRatio))
    throw DataError(fmt::format(
        "kernel system is ill-conditioned (sigma={}, lambda={}); duplicate training copies need "
        "lambda > 0",
        sigma, lambda));
  Eigen::Map<const Eigen::VectorXd> y(y_per_copy.data(), static_cast<Eigen::Index>(y_per_copy.size()));
  return KrrModel{support, ldlt.solve(y), sigma, lambda, p};
}

double krr_predict(const KrrModel& model, const Eigen::MatrixXd& copies) {
  if (copies.rows() == 0) throw DataError("no copies to predict");
  const Eigen::MatrixXd k = (-l1_distances(copies, model.support) / model.sigma).array().exp().matrix();
  return (k * model.dual).mean();
}

GridSearchResult grid_search(const Eigen::MatrixXd& dist, std::span<const double> labels, int p,
                             const FoldAssignment& folds, std::span<const double> sigma_grid,
                             std::span<const double> lambda_grid) {
  const std::size_t n = labels.size();
  require_square(dist, n * static_cast<std::size_t>(p), "grid search");
  if (sigma_grid.empty() || lambda_grid.empty()) throw ConfigError("empty KRR grid");
  if (folds.fold_of.size() != n) throw DataError("fold assignment does not match the labels");

  const auto ns = static_cast<Eigen::Index>(sigma_grid.size());
  const auto nl = static_cast<Eigen::Index>(lambda_grid.size());
  GridSearchResult out;
  out.mae = Eigen::MatrixXd::Zero(ns, nl);

  auto copy_rows = [p](std::span<const std::size_t> mols) {
    std::vector<Eigen::Index> rows;
    for (auto m : mols)
      for (int q = 0; q < p; ++q) rows.push_back(static_cast<Eigen::Index>(m) * p + q);
    return rows;
  };

  for (int f = 0; f < folds.n_folds; ++f) {
    const auto train = folds.complement(f);
    const auto val = folds.members(f);
    if (train.empty() || val.empty()) continue;
    const auto tr = copy_rows(train), va = copy_rows(val);
    const Eigen::MatrixXd d_tt = dist(tr, tr);
    const Eigen::MatrixXd d_vt = dist(va, tr);
    Eigen::VectorXd y(static_cast<Eigen::Index>(tr.size()));
    for (std::size_t i = 0; i < train.size(); ++i)
      for (int q = 0; q < p; ++q) y(static_cast<Eigen::Index>(i) * p + q) = labels[train[i]];

    for (Eigen::Index si = 0; si < ns; ++si) {
      const double sigma = sigma_grid[static_cast<std::size_t>(si)];
      if (!(sigma > 0)) throw ConfigError("kernel widths must be positive");
      const Eigen::MatrixXd k_tt = (-d_tt / sigma).array().exp().matrix();
      const Eigen::MatrixXd k_vt = (-d_vt / sigma).array().exp().matrix();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k_tt);
      const Eigen::VectorXd& ev = eig.eigenvalues();
      const Eigen::VectorXd proj = eig.eigenvectors().transpose() * y;
      const Eigen::MatrixXd kv_basis = k_vt * eig.eigenvectors();
      for (Eigen::Index li = 0; li < nl; ++li) {
        const double lambda = lambda_grid[static_cast<std::size_t>(li)];
        if (lambda < 0) throw ConfigError("ridge parameters must be non-negative");
        const Eigen::VectorXd shifted = ev.array() + lambda;
        if (!(shifted.minCoeff() > kSingularRatio * shifted.maxCoeff())) {
          out.mae(si, li) = std::numeric_limits<double>::infinity();
          continue;
        }
        const Eigen::VectorXd pred_copies = kv_basis * (proj.array() / shifted.array()).matrix();
        double err = 0.0;
        for (std::size_t i = 0; i < val.size(); ++i) {
          const double pred =
              pred_copies.segment(static_cast<Eigen::Index>(i) * p, p).mean();
          err += std::abs(pred - labels[val[i]]);
        }
        out.mae(si, li) += err / static_cast<double>(val.size()) / folds.n_folds;
      }
    }
  }

  // Grids are scanned in ascending order so that ties resolve to smaller values.
  std::vector<Eigen::Index> sig_order(static_cast<std::size_t>(ns)), lam_order(static_cast<std::size_t>(nl));
  std::iota(sig_order.begin(), sig_order.end(), 0);
  std::iota(lam_order.begin(), lam_order.end(), 0);
  std::stable_sort(sig_order.begin(), sig_order.end(), [&](auto a, auto b) {
    return sigma_grid[static_cast<std::size_t>(a)] < sigma_grid[static_cast<std::size_t>(b)];
  });
  std::stable_sort(lam_order.begin(), lam_order.end(), [&](auto a, auto b) {
    return lambda_grid[static_cast<std::size_t>(a)] < lambda_grid[static_cast<std::size_t>(b)];
  });
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (auto si : sig_order)
    for (auto li : lam_order)
      if (out.mae(si, li) < best) {
        best = out.mae(si, li);
        out.sigma = sigma_grid[static_cast<std::size_t>(si)];
        out.lambda = lambda_grid[static_cast<std::size_t>(li)];
        found = true;
      }
  if (!found) throw DataError("every (sigma, lambda) pair gave a singular kernel system");
  return out;
}

}  // namespace sctqm
