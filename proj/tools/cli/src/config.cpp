#include "flab/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace flab::cli {

Format parse_format(const std::string& s) {
  if (s == "json") return Format::json;
  if (s == "csv") return Format::csv;
  throw ConfigError("output.format", "unknown output format '" + s + "' (expected csv or json)");
}

std::string to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

namespace {

std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto s = v.get<std::int64_t>();
    if (s < 0) throw ConfigError("seed", "seed must be a non-negative 64-bit integer");
    return static_cast<std::uint64_t>(s);
  }
  throw ConfigError("seed", "seed must be a non-negative 64-bit integer");
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key == "experiment") {
      if (!value.is_string()) throw ConfigError(key, "experiment must be a string");
      cfg.experiment = value.get<std::string>();
      const auto& names = experiment_names();
      if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
        throw ConfigError(key, "unknown experiment '" + cfg.experiment + "'");
      }
    } else if (key == "parameters") {
      if (!value.is_object()) throw ConfigError(key, "parameters must be a flat JSON object");
      for (const auto& [pk, pv] : value.items()) {
        if (pv.is_object()) throw ConfigError("parameters." + pk, "parameters must be flat (no nested objects)");
      }
      cfg.parameters = value;
    } else if (key == "seed") {
      cfg.seed = parse_seed(value);
    } else if (key == "output") {
      if (!value.is_object()) throw ConfigError(key, "output must be an object with path and format");
      for (const auto& [ok, ov] : value.items()) {
        if (ok == "path") {
          if (!ov.is_string() || ov.get<std::string>().empty()) throw ConfigError("output.path", "path must be a non-empty string");
          cfg.output_path = ov.get<std::string>();
        } else if (ok == "format") {
          if (!ov.is_string()) throw ConfigError("output.format", "format must be a string");
          cfg.format = parse_format(ov.get<std::string>());
        } else {
          throw ConfigError("output." + ok, "unknown key in output");
        }
      }
    } else {
      throw ConfigError(key, "unknown top-level key '" + key + "'");
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ParamReader::ParamReader(const json& params, std::string experiment)
    : params_(params), experiment_(std::move(experiment)) {}

const json* ParamReader::find(const std::string& key) {
  used_.insert(key);
  auto it = params_.find(key);
  return it == params_.end() ? nullptr : &*it;
}

bool ParamReader::has(const std::string& key) const { return params_.contains(key); }

void ParamReader::require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError("parameters." + key, message);
}

double ParamReader::number(const std::string& key, double fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_number(), key, "expected a number");
  const double x = v->get<double>();
  require(std::isfinite(x), key, "expected a finite number");
  return x;
}

int ParamReader::integer(const std::string& key, int fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_number_integer(), key, "expected an integer");
  const auto x = v->get<std::int64_t>();
  require(x >= std::numeric_limits<int>::min() && x <= std::numeric_limits<int>::max(), key, "integer out of range");
  return static_cast<int>(x);
}

bool ParamReader::boolean(const std::string& key, bool fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_boolean(), key, "expected true or false");
  return v->get<bool>();
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_string(), key, "expected a string");
  return v->get<std::string>();
}

std::vector<double> ParamReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_array() && !v->empty(), key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    require(e.is_number() && std::isfinite(e.get<double>()), key, "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<int> ParamReader::integers(const std::string& key, const std::vector<int>& fallback) {
  const json* v = find(key);
  if (!v) return fallback;
  require(v->is_array() && !v->empty(), key, "expected a non-empty array of integers");
  std::vector<int> out;
  for (const auto& e : *v) {
    require(e.is_number_integer(), key, "expected a non-empty array of integers");
    out.push_back(e.get<int>());
  }
  return out;
}

void ParamReader::finish() const {
  for (const auto& [key, value] : params_.items()) {
    if (!used_.count(key)) {
      throw ConfigError("parameters." + key, "unknown parameter '" + key + "' for experiment " + experiment_);
    }
  }
}

}  // namespace flab::cli
