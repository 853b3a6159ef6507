#include "sctqm/molecule.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "sctqm/element.h"

namespace sctqm {
namespace {

template <class AtomT>
void check_atoms(const std::vector<AtomT>& atoms) {
  if (atoms.empty()) throw DataError("molecule has no atoms");
  for (const auto& a : atoms) {
    if (!find_element(a.z)) throw DataError(fmt::format("invalid nuclear charge {}", a.z));
    for (double c : a.position)
      if (!std::isfinite(c)) throw DataError("non-finite atom coordinate");
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t k = i + 1; k < atoms.size(); ++k) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < atoms[i].position.size(); ++c) {
        const double d = atoms[i].position[c] - atoms[k].position[c];
        d2 += d * d;
      }
      if (d2 < kMinAtomSeparation * kMinAtomSeparation)
        throw DataError(fmt::format("atoms {} and {} are closer than {} Å", i, k,
                                    kMinAtomSeparation));
    }
  }
}

template <class AtomT>
void canonicalize(std::vector<AtomT>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const AtomT& a, const AtomT& b) {
    if (a.z != b.z) return a.z < b.z;
    return a.position < b.position;
  });
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

}  // namespace

MoleculeState::MoleculeState(std::vector<Atom> atoms, std::optional<double> label,
                             std::string name)
    : atoms_(std::move(atoms)), label_(label), name_(std::move(name)) {
  check_atoms(atoms_);
  canonicalize(atoms_);
}

int MoleculeState::total_charge() const {
  int q = 0;
  for (const auto& a : atoms_) q += a.z;
  return q;
}

PlanarMolecule::PlanarMolecule(std::vector<PlanarAtom> atoms, std::optional<double> label,
                               std::string name, double deviation)
    : atoms_(std::move(atoms)), label_(label), name_(std::move(name)), deviation_(deviation) {
  check_atoms(atoms_);
  canonicalize(atoms_);
}

int PlanarMolecule::total_charge() const {
  int q = 0;
  for (const auto& a : atoms_) q += a.z;
  return q;
}

MoleculeState PlanarMolecule::to_state() const {
  std::vector<Atom> atoms;
  atoms.reserve(atoms_.size());
  for (const auto& a : atoms_) atoms.push_back({a.z, {a.position[0], a.position[1], 0.0}});
  return MoleculeState(std::move(atoms), label_, name_);
}

MoleculeState parse_xyz(std::string_view text, std::string name) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty XYZ input at line 1", 1);

  const auto count_tok = trim(lines[0]);
  long count = 0;
  {
    const auto [ptr, ec] =
        std::from_chars(count_tok.data(), count_tok.data() + count_tok.size(), count);
    if (ec != std::errc() || ptr != count_tok.data() + count_tok.size() || count < 1)
      throw ParseError(fmt::format("malformed atom count '{}' at line 1", count_tok), 1);
  }
  if (lines.size() < static_cast<std::size_t>(count) + 2)
    throw ParseError(fmt::format("expected {} atom lines, file ends at line {}", count,
                                 lines.size()),
                     static_cast<int>(lines.size()));

  std::optional<double> label;
  if (lines.size() > 1) {
    const std::string_view comment = lines[1];
    for (auto tok : split_ws(comment)) {
      constexpr std::string_view key = "energy=";
      if (tok.substr(0, key.size()) != key) continue;
      label = to_double(tok.substr(key.size()));
      if (!label) throw ParseError(fmt::format("malformed energy '{}' at line 2", tok), 2);
    }
  }

  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    const int line_no = static_cast<int>(i) + 3;
    const auto toks = split_ws(lines[static_cast<std::size_t>(i) + 2]);
    if (toks.size() < 4)
      throw ParseError(fmt::format("expected 'Symbol x y z' at line {}", line_no), line_no);
    const auto element = find_element(toks[0]);
    if (!element)
      throw ParseError(fmt::format("unknown species {} at line {}", toks[0], line_no), line_no);
    Atom atom{element->z, {}};
    for (int c = 0; c < 3; ++c) {
      const auto v = to_double(toks[static_cast<std::size_t>(c) + 1]);
      if (!v)
        throw ParseError(fmt::format("non-numeric coordinate '{}' at line {}",
                                     toks[static_cast<std::size_t>(c) + 1], line_no),
                         line_no);
      atom.position[static_cast<std::size_t>(c)] = *v;
    }
    atoms.push_back(atom);
  }
  return MoleculeState(std::move(atoms), label, std::move(name));
}

MoleculeState read_xyz_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_xyz(ss.str(), path.string());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), e.line());
  }
}

std::string to_xyz(const MoleculeState& m, std::string_view comment) {
  std::string out = fmt::format("{}\n", m.size());
  if (m.label()) out += fmt::format("energy={:.17g}", *m.label());
  if (!comment.empty()) out += fmt::format("{}{}", m.label() ? " " : "", comment);
  out += '\n';
  for (const auto& a : m.atoms()) {
    out += fmt::format("{} {:.17g} {:.17g} {:.17g}\n", find_element(a.z)->symbol,
                       a.position[0], a.position[1], a.position[2]);
  }
  return out;
}

namespace {

struct PlaneFit {
  Eigen::Vector3d centroid;
  Eigen::Vector3d normal;
};

PlaneFit fit_plane(const MoleculeState& m) {
  const auto atoms = m.atoms();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& a : atoms) c += Eigen::Vector3d(a.position[0], a.position[1], a.position[2]);
  c /= static_cast<double>(atoms.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& a : atoms) {
    const Eigen::Vector3d d = Eigen::Vector3d(a.position[0], a.position[1], a.position[2]) - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d evals = eig.eigenvalues();
  const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);

  Eigen::Vector3d n;
  if (evals[2] <= 1e-14 * std::max(scale, 1.0)) {
    n = Eigen::Vector3d::UnitZ();  // single point
  } else if (evals[1] <= 1e-12 * scale) {
    // Collinear: any plane containing the line fits; prefer the one closest to z = 0.
    const Eigen::Vector3d d = eig.eigenvectors().col(2);
    n = Eigen::Vector3d::UnitZ() - d.z() * d;
    if (n.norm() < 1e-8) n = Eigen::Vector3d::UnitX() - d.x() * d;
    n.normalize();
  } else {
    n = eig.eigenvectors().col(0).normalized();
  }
  if (n.z() < 0 || (n.z() == 0 && (n.y() < 0 || (n.y() == 0 && n.x() < 0)))) n = -n;
  return {c, n};
}

}  // namespace

double planarity_deviation(const MoleculeState& m) {
  const auto fit = fit_plane(m);
  double dev = 0.0;
  for (const auto& a : m.atoms()) {
    const Eigen::Vector3d d =
        Eigen::Vector3d(a.position[0], a.position[1], a.position[2]) - fit.centroid;
    dev = std::max(dev, std::abs(d.dot(fit.normal)));
  }
  return dev;
}

PlanarMolecule planarize(const MoleculeState& m, double tol) {
  const auto fit = fit_plane(m);
  const double dev = planarity_deviation(m);
  if (dev > tol)
    throw NonPlanarError(fmt::format("{}non-planar molecule: deviation {:.6g} Å exceeds {} Å",
                                     m.name().empty() ? "" : m.name() + ": ", dev, tol),
                         dev);

  // In-plane basis: the minimal rotation taking e_z onto the fitted normal,
  // applied to e_x and e_y. Molecules already in z = 0 keep their axes.
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d v = ez.cross(fit.normal);
  const double c = ez.dot(fit.normal);
  Eigen::Matrix3d vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  const Eigen::Matrix3d r = Eigen::Matrix3d::Identity() + vx + vx * vx / (1.0 + c);
  const Eigen::Vector3d e1 = r.col(0);
  const Eigen::Vector3d e2 = r.col(1);

  std::vector<PlanarAtom> atoms;
  atoms.reserve(m.size());
  double mx = 0.0, my = 0.0;
  for (const auto& a : m.atoms()) {
    const Eigen::Vector3d d =
        Eigen::Vector3d(a.position[0], a.position[1], a.position[2]) - fit.centroid;
    atoms.push_back({a.z, {d.dot(e1), d.dot(e2)}});
    mx += atoms.back().position[0];
    my += atoms.back().position[1];
  }
  mx /= static_cast<double>(atoms.size());
  my /= static_cast<double>(atoms.size());
  for (auto& a : atoms) {
    a.position[0] -= mx;
    a.position[1] -= my;
  }
  return PlanarMolecule(std::move(atoms), m.label(), m.name(), dev);
}

}  // namespace sctqm
