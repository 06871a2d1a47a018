#pragma once

#include <deque>
#include <string>
#include <vector>

#include "flab/cli/config.hpp"

namespace flab::cli {

/// Named column set; cells are JSON scalars.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row);
};

struct Assertion {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct Report {
  std::string experiment;
  json config;  ///< echo of the effective configuration
  std::uint64_t seed = 0;
  std::string version;
  std::string generated_at;
  std::deque<Table> tables;  ///< stable references from table()
  std::vector<Assertion> assertions;

  Table& table(const std::string& name, std::vector<std::string> columns);
  void check(std::string name, bool pass, double measured, double tolerance, std::string detail = {});
  bool all_pass() const;
};

json to_json(const Report& r);

/// JSON cell as CSV text: strings quoted when needed, numbers round-trip.
std::string csv_cell(const json& v);

/// Writes `content` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content);

/// json: one file at `path`. csv: one file per table (and one for the
/// assertions) named <stem>.<table>.csv. Returns the files written.
std::vector<std::string> write_report(const Report& r, const std::string& path, Format format);

std::string utc_timestamp();

}  // namespace flab::cli
