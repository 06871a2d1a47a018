#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flab/cli/config.hpp"
#include "flab/cli/report.hpp"
#include "flab/cli/run.hpp"
#include "flab/types.hpp"

namespace {

using flab::cli::json;

int diagnose(const std::string& kind, json detail, int code) {
  detail["error"] = kind;
  std::cerr << detail.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace flab::cli;

  CLI::App app{"flab: contraction spectra of coarse-graining channels"};
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  app.add_option("experiment", experiment, "spectrum | fock | compare | bound-check | lattice | clt")->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "root seed (overrides the config)");
  app.add_option("--out", out, "report path (overrides the config)");
  app.add_option("--format", format, "csv | json (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return diagnose("usage", {{"message", e.what()}}, exit_config_error);
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (cfg.experiment.empty()) cfg.experiment = experiment;
    if (cfg.experiment != experiment) {
      throw ConfigError("experiment", "command line selects '" + experiment + "' but the config declares '" +
                                          cfg.experiment + "'");
    }
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), experiment) == names.end()) {
      throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.output_path = *out;
    if (format) cfg.format = parse_format(*format);
    if (cfg.format == Format::csv && !cfg.output_path) throw ConfigError("output.path", "csv output needs an output path");
  } catch (const ConfigError& e) {
    return diagnose("config", {{"key", e.key()}, {"message", e.what()}}, exit_config_error);
  }

  Report rep;
  try {
    rep = run(cfg);
  } catch (const ConfigError& e) {
    return diagnose("config", {{"key", e.key()}, {"message", e.what()}}, exit_config_error);
  } catch (const flab::DomainError& e) {
    return diagnose("config", {{"key", ""}, {"message", e.what()}}, exit_config_error);
  } catch (const flab::NumericalError& e) {
    return diagnose("numerical", {{"operation", e.operation()}, {"message", e.what()}}, exit_numerical_error);
  } catch (const std::exception& e) {
    return diagnose("numerical", {{"operation", "unknown"}, {"message", e.what()}}, exit_numerical_error);
  }
  rep.generated_at = utc_timestamp();

  std::ostream& summary = cfg.output_path ? std::cout : std::cerr;
  try {
    if (cfg.output_path) {
      for (const auto& f : write_report(rep, *cfg.output_path, cfg.format)) summary << "wrote " << f << "\n";
    } else {
      std::cout << to_json(rep).dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    return diagnose("config", {{"key", "output.path"}, {"message", e.what()}}, exit_config_error);
  }
  for (const auto& a : rep.assertions) {
    summary << (a.pass ? "PASS " : "FAIL ") << a.name << " measured=" << a.measured << " tolerance=" << a.tolerance
            << "\n";
  }
  return exit_code(rep);
}
