#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace flab::cli {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"spectrum", "fock", "compare", "bound-check", "lattice", "clt"};
  return names;
}

enum class Format { json, csv };

/// An invalid configuration. `key` names the offending entry ("" when global).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(message), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  std::string experiment;
  json parameters = json::object();
  std::uint64_t seed = 0;
  std::optional<std::string> output_path;
  Format format = Format::json;
};

/// Parses and structurally validates a config document. Unknown top-level
/// keys are errors; parameter keys are checked by the experiment.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

Format parse_format(const std::string& s);
std::string to_string(Format f);

/// Typed access to the flat `parameters` object. Every read marks the key as
/// used; finish() rejects anything left over.
class ParamReader {
 public:
  ParamReader(const json& params, std::string experiment);

  double number(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  bool boolean(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);
  bool has(const std::string& key) const;

  void finish() const;

  /// Throws ConfigError for `key` unless `ok`.
  static void require(bool ok, const std::string& key, const std::string& message);

 private:
  const json* find(const std::string& key);
  const json& params_;
  std::string experiment_;
  std::set<std::string> used_;
};

}  // namespace flab::cli
