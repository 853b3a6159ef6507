#include "sctqm/cache.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "sctqm/errors.h"

namespace sctqm {
namespace {

static_assert(std::endian::native == std::endian::little,
              "cache I/O assumes a little-endian host");

constexpr char kMagic[6] = {'S', 'C', 'T', 'Q', 'M', '\x01'};

void put_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw DataError(fmt::format("feature cache truncated while reading {}", what));
  return v;
}

std::string get_string(std::istream& in, const char* what) {
  const auto n = get_u64(in, what);
  if (n > (1u << 24)) throw DataError(fmt::format("feature cache has an implausible {} length", what));
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n)))
    throw DataError(fmt::format("feature cache truncated while reading {}", what));
  return s;
}

// Sources are file paths; quote them when they contain separators.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw DataError(fmt::format("bad number '{}' in cache sidecar", s));
  return v;
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& cache) {
  auto p = cache;
  p += ".rows.csv";
  return p;
}

void write_cache(const std::filesystem::path& path, const FeatureCache& cache) {
  const auto& m = cache.matrix;
  const std::size_t n = m.n_rows(), d = m.n_features();
  if (!m.schema || m.schema->size() != d)
    throw DataError("feature cache schema does not match the matrix width");
  if (cache.sources.size() != n || cache.labels.size() != n || cache.deviations.size() != n)
    throw DataError("feature cache row metadata does not match the matrix height");

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out.write(kMagic, sizeof kMagic);
    put_string(out, cache.fingerprint);
    put_u64(out, d);
    for (const auto& id : *m.schema) put_string(out, id);
    put_u64(out, n);
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k)
        row[k] = m.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(d * sizeof(double)));
    }
    if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
  }
  std::ofstream side(sidecar_path(path), std::ios::trunc);
  side << "index,source,label,deviation\n";
  for (std::size_t i = 0; i < n; ++i)
    side << fmt::format("{},{},{},{:.17g}\n", i, csv_field(cache.sources[i]),
                        cache.labels[i] ? fmt::format("{:.17g}", *cache.labels[i]) : "",
                        cache.deviations[i]);
}

FeatureCache read_cache(const std::filesystem::path& path,
                        const std::optional<std::string>& expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open feature cache {}", path.string()));
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError(fmt::format("{} is not a feature cache", path.string()));

  FeatureCache cache;
  cache.fingerprint = get_string(in, "fingerprint");
  if (expected_fingerprint && *expected_fingerprint != cache.fingerprint)
    throw DataError(fmt::format("feature cache fingerprint mismatch:\n  cache:  {}\n  config: {}",
                                cache.fingerprint, *expected_fingerprint));
  const auto d = get_u64(in, "schema size");
  auto schema = std::make_shared<FeatureSchema>();
  schema->reserve(d);
  for (std::uint64_t k = 0; k < d; ++k) schema->push_back(get_string(in, "feature id"));
  const auto n = get_u64(in, "row count");
  cache.matrix.schema = schema;
  cache.matrix.rows.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<double> row(d);
  for (std::uint64_t i = 0; i < n; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(d * sizeof(double))))
      throw DataError("feature cache truncated in the matrix body");
    for (std::size_t k = 0; k < d; ++k)
      cache.matrix.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
  }

  std::ifstream side(sidecar_path(path));
  if (!side) throw DataError(fmt::format("missing cache sidecar {}", sidecar_path(path).string()));
  std::string line;
  std::getline(side, line);
  while (std::getline(side, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw DataError(fmt::format("malformed cache sidecar line '{}'", line));
    cache.sources.push_back(f[1]);
    cache.labels.push_back(f[2].empty() ? std::nullopt : std::optional<double>(to_double(f[2])));
    cache.deviations.push_back(to_double(f[3]));
  }
  if (cache.sources.size() != n)
    throw DataError(fmt::format("cache sidecar lists {} rows, matrix has {}", cache.sources.size(), n));
  return cache;
}

}  // namespace sctqm
