// sctqm: featurize molecules, cross-validate sparse regressions, compare runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sctqm/cache.h"
#include "sctqm/config.h"
#include "sctqm/coulomb.h"
#include "sctqm/dataset.h"
#include "sctqm/errors.h"
#include "sctqm/pipeline.h"
#include "sctqm/synthetic.h"

namespace fs = std::filesystem;
using namespace sctqm;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void log_line(const std::string& s) { fmt::print(stderr, "{}\n", s); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << text;
}

struct CommonFlags {
  std::string config;
  std::string out;
  int jobs = -1;
  bool strict = false;
};

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.jobs >= 0) c.jobs = f.jobs;
  if (f.strict) c.strict_planar = true;
  validate(c);
  return c;
}

Dataset require_dataset(const RunConfig& c) {
  if (c.manifest.empty()) throw ConfigError("no manifest given (set `manifest` in the config)");
  return load_dataset(c.manifest);
}

std::vector<double> require_labels(const FeatureCache& cache) {
  std::vector<double> y;
  for (std::size_t i = 0; i < cache.labels.size(); ++i) {
    if (!cache.labels[i])
      throw DataError(fmt::format("molecule {} has no energy label", cache.sources[i]));
    y.push_back(*cache.labels[i]);
  }
  return y;
}

FeatureCache load_or_featurize(const RunConfig& c, const fs::path& cache_path) {
  const auto fp = feature_fingerprint(c);
  if (fs::exists(cache_path)) {
    log_line(fmt::format("reading cache {}", cache_path.string()));
    return read_cache(cache_path, fp);
  }
  auto result = featurize(require_dataset(c), c, log_line);
  write_cache(cache_path, result.cache);
  return std::move(result.cache);
}

int cmd_featurize(const CommonFlags& f) {
  const auto c = resolve(f);
  const fs::path out = f.out.empty() ? c.output / "features.bin" : fs::path(f.out);
  const auto result = featurize(require_dataset(c), c, log_line);
  write_cache(out, result.cache);
  log_line(fmt::format("wrote {} ({} x {})", out.string(), result.cache.matrix.n_rows(),
                       result.cache.matrix.n_features()));
  return 0;
}

int cmd_cv(const CommonFlags& f, const std::string& cache_arg) {
  auto c = resolve(f);
  if (!f.out.empty()) c.output = f.out;
  fs::create_directories(c.output);
  write_text(c.output / "run.cfg", dump_config(c));

  CvReport report;
  std::vector<std::string> names;
  if (c.representation == Representation::coulomb) {
    const auto d = require_dataset(c);
    std::vector<double> y;
    for (const auto& m : d.molecules) {
      if (!m.label()) throw DataError(fmt::format("molecule {} has no energy label", m.name()));
      y.push_back(*m.label());
      names.push_back(m.name());
    }
    const int k_max = c.k_max > 0 ? c.k_max : max_atom_count(d.molecules);
    const auto copies = coulomb_copies(d.molecules, k_max, c.krr_copies, c.krr_noise, c.seed);
    const auto folds = assign_folds(y, c.n_folds, c.seed);
    write_text(c.output / "folds.csv", folds_to_csv(folds));
    report = cross_validate_krr(copies, y, folds, c.sigma_grid, c.lambda_grid);
  } else {
    const fs::path cache_path = cache_arg.empty() ? c.output / "features.bin" : fs::path(cache_arg);
    const auto cache = load_or_featurize(c, cache_path);
    const auto y = require_labels(cache);
    names = cache.sources;
    const auto folds = assign_folds(y, c.n_folds, c.seed);
    write_text(c.output / "folds.csv", folds_to_csv(folds));
    report = cross_validate_ols(cache.matrix, y, folds, static_cast<std::size_t>(c.m_max));

    // Final model on every molecule, with M chosen by the same folds.
    const auto cap = std::min({static_cast<std::size_t>(c.m_max), y.size(),
                               cache.matrix.n_features() + 1});
    const auto order = select_model_order(cache.matrix.rows, y, folds, cap);
    const auto path = ols_fit(cache.matrix.rows, y, cap);
    const auto m = std::min(order.best_m, path.size());
    auto model = make_model(path, m, *cache.matrix.schema);
    model.representation = std::string(to_string(c.representation));
    model.fingerprint = cache.fingerprint;
    model.metadata["N"] = std::to_string(y.size());
    model.metadata["cv_rmse"] = fmt::format("{:.17g}", order.cv_rmse[m - 1]);
    write_text(c.output / "model.txt", model_to_text(model));
  }
  write_cv_outputs(c.output, report, names);
  log_line(fmt::format("{}: MAE {:.3f}  RMSE {:.3f}  ({} folds) -> {}", to_string(c.representation),
                       report.overall.mae, report.overall.rmse, report.folds.size(),
                       c.output.string()));
  return 0;
}

int cmd_compare(const std::vector<std::string>& runs, const std::string& out) {
  if (runs.size() < 2) throw ConfigError("compare needs at least two run directories");
  std::vector<RunSummary> rows;
  for (const auto& r : runs) rows.push_back(read_run_summary(r));
  const auto md = compare_markdown(rows);
  std::cout << md;
  if (!out.empty()) {
    write_text(fs::path(out) / "table.md", md);
    write_text(fs::path(out) / "table.csv", compare_csv(rows));
  }
  return 0;
}

int cmd_synth(int n, std::uint64_t seed, const std::string& out) {
  if (out.empty()) throw ConfigError("synth needs --out");
  const auto d = make_synthetic_dataset(n, seed);
  const fs::path dir(out);
  fs::create_directories(dir / "xyz");
  std::vector<fs::path> entries;
  for (const auto& m : d.molecules) {
    const fs::path rel = fs::path("xyz") / (m.name() + ".xyz");
    write_text(dir / rel, to_xyz(m, ""));
    entries.push_back(rel);
  }
  write_manifest(dir / "manifest.txt", entries);
  log_line(fmt::format("wrote {} molecules to {}", d.molecules.size(), dir.string()));
  return 0;
}

int cmd_predict(const CommonFlags& f, const std::string& model_path,
                const std::vector<std::string>& inputs) {
  auto c = resolve(f);
  std::ifstream in(model_path);
  if (!in) throw DataError(fmt::format("cannot read model {}", model_path));
  std::stringstream ss;
  ss << in.rdbuf();
  const auto schema = shared_schema(c.representation, c.resolved_J(), c.L);
  const auto model = model_from_text(ss.str(), *schema);
  if (model.fingerprint != feature_fingerprint(c))
    throw DataError("model was trained with a different feature configuration");

  Dataset d;
  if (inputs.empty()) {
    d = require_dataset(c);
  } else {
    for (const auto& p : inputs) d.molecules.push_back(read_xyz_file(p));
  }
  const auto result = featurize(d, c, log_line);
  std::string csv = "name,prediction,label\n";
  for (std::size_t r = 0; r < result.kept.size(); ++r) {
    const auto row = result.cache.matrix.rows.row(static_cast<Eigen::Index>(r));
    const std::vector<double> v(row.begin(), row.end());
    const auto& label = result.cache.labels[r];
    csv += fmt::format("{},{:.17g},{}\n", result.cache.sources[r], model.predict(v),
                       label ? fmt::format("{:.17g}", *label) : "");
  }
  if (f.out.empty())
    std::cout << csv;
  else
    write_text(f.out, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Molecular energy regression from planar electron-density invariants"};
  app.require_subcommand(0, 1);
  bool dump = false;
  app.add_flag("--dump-config", dump, "Print every configuration key with its value and exit");

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Configuration file (key = value)");
    sub->add_option("--out", flags.out, "Output path");
    sub->add_option("--jobs", flags.jobs, "Worker threads for featurization (0: all cores)");
    sub->add_flag("--strict-planar", flags.strict, "Fail instead of skipping non-planar molecules");
  };

  auto* featurize_cmd = app.add_subcommand("featurize", "Extract features into a binary cache");
  add_common(featurize_cmd);

  auto* cv_cmd = app.add_subcommand("cv", "Nested cross-validation of the configured model");
  add_common(cv_cmd);
  std::string cache_arg;
  cv_cmd->add_option("--cache", cache_arg, "Feature cache (default: <output>/features.bin)");

  auto* compare_cmd = app.add_subcommand("compare", "Tabulate M, MAE and RMSE of finished runs");
  std::vector<std::string> runs;
  std::string compare_out;
  compare_cmd->add_option("runs", runs, "Run directories")->required();
  compare_cmd->add_option("--out", compare_out, "Directory for table.md and table.csv");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic labeled dataset");
  int synth_n = 200;
  std::uint64_t synth_seed = 1;
  std::string synth_out;
  synth_cmd->add_option("-n,--count", synth_n, "Number of molecules");
  synth_cmd->add_option("--seed", synth_seed, "Random seed");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Apply an exported linear model");
  add_common(predict_cmd);
  std::string model_path;
  std::vector<std::string> inputs;
  predict_cmd->add_option("--model", model_path, "model.txt written by cv")->required();
  predict_cmd->add_option("inputs", inputs, "XYZ files (default: the configured manifest)");

  for (auto* sub : {featurize_cmd, cv_cmd, predict_cmd})
    sub->add_flag("--dump-config", dump, "Print the resolved configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (dump) {
      std::cout << dump_config(flags.config.empty() ? RunConfig{} : load_config(flags.config));
      return 0;
    }
    if (*featurize_cmd) return cmd_featurize(flags);
    if (*cv_cmd) return cmd_cv(flags, cache_arg);
    if (*compare_cmd) return cmd_compare(runs, compare_out);
    if (*synth_cmd) return cmd_synth(synth_n, synth_seed, synth_out);
    if (*predict_cmd) return cmd_predict(flags, model_path, inputs);
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
