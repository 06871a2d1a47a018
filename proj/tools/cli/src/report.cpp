#include "flab/cli/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace flab::cli {

void Table::add(std::vector<json> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

Table& Report::table(const std::string& name, std::vector<std::string> columns) {
  for (auto& t : tables) {
    if (t.name == name) return t;
  }
  tables.push_back({name, std::move(columns), {}});
  return tables.back();
}

void Report::check(std::string name, bool pass, double measured, double tolerance, std::string detail) {
  assertions.push_back({std::move(name), pass, measured, tolerance, std::move(detail)});
}

bool Report::all_pass() const {
  for (const auto& a : assertions) {
    if (!a.pass) return false;
  }
  return true;
}

namespace {

// Non-finite doubles have no JSON literal; they are written as strings.
json finite_or_text(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const Report& r) {
  json out;
  out["experiment"] = r.experiment;
  out["metadata"] = {{"config", r.config}, {"seed", r.seed}, {"version", r.version}, {"generated_at", r.generated_at}};
  json tables = json::object();
  for (const auto& t : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json obj = json::array();
      for (const auto& cell : row) obj.push_back(cell.is_number_float() ? finite_or_text(cell.get<double>()) : cell);
      rows.push_back(std::move(obj));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", rows}};
  }
  out["tables"] = tables;
  json asserts = json::array();
  for (const auto& a : r.assertions) {
    asserts.push_back({{"name", a.name},
                       {"pass", a.pass},
                       {"measured", finite_or_text(a.measured)},
                       {"tolerance", finite_or_text(a.tolerance)},
                       {"detail", a.detail}});
  }
  out["assertions"] = asserts;
  out["pass"] = r.all_pass();
  return out;
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  if (v.is_number_float()) {
    const json f = finite_or_text(v.get<double>());
    return f.is_string() ? f.get<std::string>() : f.dump();
  }
  return v.dump();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

std::vector<std::string> write_report(const Report& r, const std::string& path, Format format) {
  if (format == Format::json) {
    write_atomic(path, to_json(r).dump(2) + "\n");
    return {path};
  }
  namespace fs = std::filesystem;
  fs::path stem(path);
  if (stem.extension() == ".csv" || stem.extension() == ".json") stem.replace_extension();
  std::ostringstream header;
  header << "# experiment: " << r.experiment << "\n"
         << "# seed: " << r.seed << "\n"
         << "# version: " << r.version << "\n"
         << "# generated_at: " << r.generated_at << "\n"
         << "# config: " << r.config.dump() << "\n";

  std::vector<Table> all(r.tables.begin(), r.tables.end());
  Table asserts{"assertions", {"name", "pass", "measured", "tolerance", "detail"}, {}};
  for (const auto& a : r.assertions) asserts.add({a.name, a.pass, a.measured, a.tolerance, a.detail});
  all.push_back(std::move(asserts));

  std::vector<std::string> written;
  for (const auto& t : all) {
    std::ostringstream body;
    body << header.str() << "# table: " << t.name << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) body << (c ? "," : "") << t.columns[c];
    body << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) body << (c ? "," : "") << csv_cell(row[c]);
      body << "\n";
    }
    const std::string file = stem.string() + "." + t.name + ".csv";
    write_atomic(file, body.str());
    written.push_back(file);
  }
  return written;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace flab::cli
