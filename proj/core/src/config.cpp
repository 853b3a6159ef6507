#include "sctqm/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sctqm/errors.h"
#include "sctqm/fft.h"

namespace sctqm {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& v, const std::string& key, int line) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end || v.empty())
    throw ConfigError(fmt::format("line {}: '{}' is not a valid value for {}", line, v, key));
  return out;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("line {}: '{}' is not a boolean for {}", line, v, key));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& v, const std::string& key, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_number<double>(item, key, line));
  if (out.empty()) throw ConfigError(fmt::format("line {}: {} needs at least one value", line, key));
  return out;
}

std::string join_grid(const std::vector<double>& g) {
  std::string out;
  for (std::size_t i = 0; i < g.size(); ++i) out += fmt::format("{}{:.17g}", i ? "," : "", g[i]);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

int RunConfig::resolved_J() const {
  if (J > 0) return J;
  return representation == Representation::scattering ? 9 : 10;
}

FilterBankParams RunConfig::filter_params() const {
  FilterBankParams p;
  p.J = resolved_J();
  p.L = L;
  p.slant = slant;
  p.xi = xi;
  p.angular_xi = xi;
  return p;
}

RunConfig parse_config(const std::string& text, RunConfig c) {
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line));
    const std::string key = trim(s.substr(0, eq)), v = trim(s.substr(eq + 1));

    if (key == "manifest") c.manifest = v;
    else if (key == "representation") c.representation = parse_representation(v);
    else if (key == "J") c.J = parse_number<int>(v, key, line);
    else if (key == "L") c.L = parse_number<int>(v, key, line);
    else if (key == "a") c.half_width = parse_number<double>(v, key, line);
    else if (key == "slant") c.slant = parse_number<double>(v, key, line);
    else if (key == "xi") c.xi = parse_number<double>(v, key, line);
    else if (key == "planarity_tol") c.planarity_tol = parse_number<double>(v, key, line);
    else if (key == "profiles") {
      c.profiles.clear();
      for (const auto& item : split_list(v)) c.profiles.emplace_back(item);
    }
    else if (key == "features.fourier_bin_mean") c.features.fourier_bin_mean = parse_bool(v, key, line);
    else if (key == "features.measure_weights") c.features.measure_weights = parse_bool(v, key, line);
    else if (key == "n_folds") c.n_folds = parse_number<int>(v, key, line);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(v, key, line);
    else if (key == "M_max") c.m_max = parse_number<int>(v, key, line);
    else if (key == "krr.sigma_grid") c.sigma_grid = parse_grid(v, key, line);
    else if (key == "krr.lambda_grid") c.lambda_grid = parse_grid(v, key, line);
    else if (key == "krr.copies") c.krr_copies = parse_number<int>(v, key, line);
    else if (key == "krr.noise") c.krr_noise = parse_number<double>(v, key, line);
    else if (key == "krr.k_max") c.k_max = parse_number<int>(v, key, line);
    else if (key == "output") c.output = v;
    else if (key == "jobs") c.jobs = parse_number<int>(v, key, line);
    else if (key == "strict_planar") c.strict_planar = parse_bool(v, key, line);
    else throw ConfigError(fmt::format("line {}: unknown key '{}'", line, key));
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  RunConfig c = parse_config(read_file(path));
  // Relative paths in a config file are relative to the file itself.
  const auto base = path.parent_path();
  if (!c.manifest.empty() && c.manifest.is_relative()) c.manifest = base / c.manifest;
  for (auto& p : c.profiles)
    if (p.is_relative()) p = base / p;
  return c;
}

std::string dump_config(const RunConfig& c) {
  std::string profiles;
  for (std::size_t i = 0; i < c.profiles.size(); ++i)
    profiles += (i ? "," : "") + c.profiles[i].string();
  std::string out;
  out += fmt::format("manifest = {}\n", c.manifest.string());
  out += fmt::format("representation = {}\n", to_string(c.representation));
  out += "# 0 selects 9 for scattering and 10 otherwise\n";
  out += fmt::format("J = {}\n", c.J);
  out += fmt::format("L = {}\n", c.L);
  out += fmt::format("a = {:.17g}\n", c.half_width);
  out += fmt::format("slant = {:.17g}\n", c.slant);
  out += fmt::format("xi = {:.17g}\n", c.xi);
  out += fmt::format("planarity_tol = {:.17g}\n", c.planarity_tol);
  out += fmt::format("profiles = {}\n", profiles);
  out += fmt::format("features.fourier_bin_mean = {}\n", c.features.fourier_bin_mean);
  out += fmt::format("features.measure_weights = {}\n", c.features.measure_weights);
  out += fmt::format("n_folds = {}\n", c.n_folds);
  out += fmt::format("seed = {}\n", c.seed);
  out += fmt::format("M_max = {}\n", c.m_max);
  out += fmt::format("krr.sigma_grid = {}\n", join_grid(c.sigma_grid));
  out += fmt::format("krr.lambda_grid = {}\n", join_grid(c.lambda_grid));
  out += fmt::format("krr.copies = {}\n", c.krr_copies);
  out += fmt::format("krr.noise = {:.17g}\n", c.krr_noise);
  out += "# 0 uses the largest molecule in the dataset\n";
  out += fmt::format("krr.k_max = {}\n", c.k_max);
  out += fmt::format("output = {}\n", c.output.string());
  out += "# 0 uses every hardware thread\n";
  out += fmt::format("jobs = {}\n", c.jobs);
  out += fmt::format("strict_planar = {}\n", c.strict_planar);
  return out;
}

void validate(const RunConfig& c) {
  if (c.representation != Representation::coulomb) {
    c.filter_params().validate();
    if (c.representation == Representation::scattering && c.L < 4)
      throw ConfigError("the scattering dictionary needs L >= 4");
  }
  if (!(c.half_width > 0)) throw ConfigError("a must be positive");
  if (!(c.planarity_tol >= 0)) throw ConfigError("planarity_tol must be non-negative");
  if (c.n_folds < 2) throw ConfigError("n_folds must be at least 2");
  if (c.m_max < 1) throw ConfigError("M_max must be at least 1");
  for (double s : c.sigma_grid)
    if (!(s > 0)) throw ConfigError("krr.sigma_grid values must be positive");
  for (double l : c.lambda_grid)
    if (!(l >= 0)) throw ConfigError("krr.lambda_grid values must be non-negative");
  if (c.krr_copies < 1) throw ConfigError("krr.copies must be at least 1");
  if (!(c.krr_noise >= 0)) throw ConfigError("krr.noise must be non-negative");
  if (c.k_max < 0) throw ConfigError("krr.k_max must be non-negative");
  if (c.jobs < 0) throw ConfigError("jobs must be non-negative");
}

std::string feature_fingerprint(const RunConfig& c) {
  std::string out = fmt::format(
      "repr={};J={};L={};a={:.17g};slant={:.17g};xi={:.17g};fft={};profile=slater-{:.17g}",
      to_string(c.representation), c.resolved_J(), c.L, c.half_width, c.slant, c.xi,
      kFftConvention, kSlaterDecayScale);
  for (const auto& p : c.profiles)
    out += fmt::format(";override={:016x}", fnv1a(read_file(p)));
  out += fmt::format(";bin_mean={};measure={};tol={:.17g}", c.features.fourier_bin_mean,
                     c.features.measure_weights, c.planarity_tol);
  return out;
}

}  // namespace sctqm
