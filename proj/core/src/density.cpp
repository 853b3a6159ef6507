#include "sctqm/density.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "sctqm/element.h"
#include "sctqm/errors.h"

namespace sctqm {
namespace {

constexpr double kEnclosedChargeFraction = 0.9995;
constexpr double kSlaterStep = 0.005;  // tabulation step in units of 1/q

double trapezoid(std::span<const double> x, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

}  // namespace

double AtomicRadialProfile::charge() const {
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = 4.0 * std::numbers::pi * r[i] * r[i] * rho3d[i];
  return trapezoid(r, f);
}

double RadialProfile2D::charge() const {
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) f[i] = 2.0 * std::numbers::pi * r[i] * rho2d[i];
  return trapezoid(r, f);
}

double RadialProfile2D::operator()(double radius) const {
  if (r.empty() || radius > r.back()) return 0.0;
  const auto it = std::upper_bound(r.begin(), r.end(), radius);
  if (it == r.end()) return rho2d.back();
  const auto hi = static_cast<std::size_t>(it - r.begin());
  const auto lo = hi - 1;
  const double t = (radius - r[lo]) / (r[hi] - r[lo]);
  return rho2d[lo] + t * (rho2d[hi] - rho2d[lo]);
}

AtomicRadialProfile slater_profile(const std::string& species, int z, double decay) {
  if (!(decay > 0)) throw ConfigError("Slater decay must be positive");
  AtomicRadialProfile p;
  p.species = species;
  p.z = z;
  const double norm = z * decay * decay * decay / (8.0 * std::numbers::pi);
  for (int i = 0;; ++i) {
    const double x = i * kSlaterStep;
    const double r = x / decay;
    p.r.push_back(r);
    p.rho3d.push_back(norm * std::exp(-x));
    const double enclosed = 1.0 - std::exp(-x) * (1.0 + x + 0.5 * x * x);
    if (enclosed >= kEnclosedChargeFraction) break;
  }
  return p;
}

AtomicRadialProfile default_profile(const std::string& species) {
  const auto e = find_element(species);
  if (!e) throw DataError(fmt::format("unknown species {}", species));
  return slater_profile(std::string(e->symbol), e->z, kSlaterDecayScale / e->covalent_radius);
}

void validate_profile(const AtomicRadialProfile& p) {
  if (p.r.size() < 2 || p.r.size() != p.rho3d.size())
    throw DataError(fmt::format("profile {}: need at least two samples", p.species));
  if (p.r.front() != 0.0) throw DataError(fmt::format("profile {}: r must start at 0", p.species));
  for (std::size_t i = 1; i < p.r.size(); ++i)
    if (!(p.r[i] > p.r[i - 1]))
      throw DataError(fmt::format("profile {}: r not strictly increasing at row {}", p.species, i));
  for (double v : p.rho3d)
    if (!(v >= 0) || !std::isfinite(v))
      throw DataError(fmt::format("profile {}: negative or non-finite density", p.species));
  const double q = p.charge();
  if (std::abs(q - p.z) > 1e-3 * p.z)
    throw DataError(fmt::format("profile {}: integrates to {:.6f}, expected {}", p.species, q, p.z));
}

AtomicRadialProfile load_profile_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open profile {}", path.string()));
  AtomicRadialProfile p;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        if (tok.rfind("species=", 0) == 0) p.species = normalize_symbol(tok.substr(8));
        if (tok.rfind("z=", 0) == 0) p.z = std::stoi(tok.substr(2));
      }
      have_header = true;
      continue;
    }
    if (line.rfind("r,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(fmt::format("{}: expected 'r,rho3d' at line {}", path.string(), line_no),
                       line_no);
    try {
      p.r.push_back(std::stod(line.substr(0, comma)));
      p.rho3d.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError(fmt::format("{}: non-numeric value at line {}", path.string(), line_no),
                       line_no);
    }
  }
  if (!have_header || p.species.empty() || p.z <= 0)
    throw DataError(fmt::format("{}: missing '# species=<symbol> z=<int>' header", path.string()));
  const auto e = find_element(p.species);
  if (!e || e->z != p.z)
    throw DataError(fmt::format("{}: species {} does not match z={}", path.string(), p.species, p.z));
  validate_profile(p);
  return p;
}

std::string profile_to_csv(const AtomicRadialProfile& p) {
  std::string out = fmt::format("# species={} z={}\nr,rho3d\n", p.species, p.z);
  for (std::size_t i = 0; i < p.r.size(); ++i)
    out += fmt::format("{:.17g},{:.17g}\n", p.r[i], p.rho3d[i]);
  return out;
}

RadialProfile2D condense_3d_to_2d(const AtomicRadialProfile& p) {
  RadialProfile2D out;
  out.species = p.species;
  out.z = p.z;
  out.r = p.r;
  out.rho2d.resize(p.r.size());
  for (std::size_t i = 0; i < p.r.size(); ++i) out.rho2d[i] = 2.0 * p.r[i] * p.rho3d[i];
  return out;
}

ProfileSet make_profile_set(std::span<const int> zs,
                            std::span<const std::filesystem::path> override_files) {
  ProfileSet set;
  for (const auto& f : override_files) {
    auto p = load_profile_csv(f);
    set[p.z] = condense_3d_to_2d(p);
  }
  for (int z : zs) {
    if (set.count(z)) continue;
    const auto e = find_element(z);
    if (!e) throw DataError(fmt::format("no profile for nuclear charge {}", z));
    set[z] = condense_3d_to_2d(default_profile(std::string(e->symbol)));
  }
  return set;
}

double DensityGrid::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  const double d = spacing();
  return s * d * d;
}

DensityGrid rasterize(const PlanarMolecule& m, const ProfileSet& profiles, double half_width,
                      int resolution) {
  if (resolution < 1 || resolution > 14) throw ConfigError("grid resolution J must be in [1, 14]");
  if (!(half_width > 0)) throw ConfigError("box half-width must be positive");

  double margin = 0.0;
  for (const auto& a : m.atoms()) {
    const auto it = profiles.find(a.z);
    if (it == profiles.end())
      throw DataError(fmt::format("no density profile for nuclear charge {}", a.z));
    margin = std::max(margin, it->second.r_max());
  }
  const auto atoms = m.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const auto& p = atoms[k].position;
    if (std::abs(p[0]) > half_width - margin || std::abs(p[1]) > half_width - margin)
      throw DataError(fmt::format(
          "{}atom {} at ({:.4f}, {:.4f}) lies outside the safe box: margin {:.4f} Å inside a={} Å",
          m.name().empty() ? "" : m.name() + ": ", k, p[0], p[1], margin, half_width));
  }

  DensityGrid g;
  g.resolution = resolution;
  g.half_width = half_width;
  const int n = g.side();
  const double delta = g.spacing();
  g.values.assign(static_cast<std::size_t>(n) * n, 0.0);

  for (const auto& a : atoms) {
    const auto& prof = profiles.at(a.z);
    const double rmax = prof.r_max();
    // Cells whose centers can lie within rmax of the nucleus.
    const auto lo = [&](double c) {
      return std::max(0, static_cast<int>(std::floor((c - rmax) / delta + n / 2 - 0.5)));
    };
    const auto hi = [&](double c) {
      return std::min(n - 1, static_cast<int>(std::ceil((c + rmax) / delta + n / 2 - 0.5)));
    };
    const int x0 = lo(a.position[0]), x1 = hi(a.position[0]);
    const int y0 = lo(a.position[1]), y1 = hi(a.position[1]);
    for (int ix = x0; ix <= x1; ++ix) {
      const double dx = g.cell_center(ix) - a.position[0];
      for (int iy = y0; iy <= y1; ++iy) {
        const double dy = g.cell_center(iy) - a.position[1];
        const double r = std::sqrt(dx * dx + dy * dy);
        if (r > rmax) continue;
        g.values[static_cast<std::size_t>(ix) * n + iy] += prof(r);
      }
    }
  }

  g.raw_charge = g.integral();
  if (!(g.raw_charge > 0)) throw DataError("rasterized density is empty; grid too coarse");
  const double scale = m.total_charge() / g.raw_charge;
  for (double& v : g.values) v *= scale;
  return g;
}

DensityGrid rotate90(const DensityGrid& g) {
  DensityGrid out = g;
  const int n = g.side();
  // out(x_i, y_j) = in(y_j, -x_i); -x_i is index n-1-i.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.values[static_cast<std::size_t>(i) * n + j] = g.at(j, n - 1 - i);
  return out;
}

DensityGrid reflect_y(const DensityGrid& g) {
  DensityGrid out = g;
  const int n = g.side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.values[static_cast<std::size_t>(i) * n + j] = g.at(i, n - 1 - j);
  return out;
}

DensityGrid cyclic_shift(const DensityGrid& g, int sx, int sy) {
  DensityGrid out = g;
  const int n = g.side();
  const auto wrap = [n](int i) { return ((i % n) + n) % n; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.values[static_cast<std::size_t>(wrap(i + sx)) * n + wrap(j + sy)] = g.at(i, j);
  return out;
}

}  // namespace sctqm
