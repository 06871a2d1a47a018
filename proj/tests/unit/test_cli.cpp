#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "flab/cli/config.hpp"
#include "flab/cli/report.hpp"
#include "flab/cli/run.hpp"

using namespace flab::cli;

namespace {

RunConfig config_of(const std::string& text) { return parse_config(json::parse(text)); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_key(const std::string& text) {
  try {
    run(config_of(text));
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

}  // namespace

TEST(Config, ParsesDefaultsAndOutput) {
  const auto c = config_of(R"({"experiment":"fock","parameters":{"y":3},"seed":5,
                               "output":{"path":"out.csv","format":"csv"}})");
  EXPECT_EQ(c.experiment, "fock");
  EXPECT_EQ(c.seed, 5u);
  ASSERT_TRUE(c.output_path.has_value());
  EXPECT_EQ(*c.output_path, "out.csv");
  EXPECT_EQ(c.format, Format::csv);
  const auto d = config_of(R"({"experiment":"clt"})");
  EXPECT_EQ(d.format, Format::json);
  EXPECT_FALSE(d.output_path.has_value());
}

TEST(Config, StructuralErrors) {
  EXPECT_THROW(config_of(R"({"experiment":"nope"})"), ConfigError);
  EXPECT_THROW(config_of(R"({"experiment":"fock","extra":1})"), ConfigError);
  EXPECT_THROW(config_of(R"({"experiment":"fock","parameters":[1]})"), ConfigError);
  EXPECT_THROW(config_of(R"({"experiment":"fock","seed":-1})"), ConfigError);
  EXPECT_THROW(config_of(R"({"experiment":"fock","output":{"format":"xml"}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/flab.json"), ConfigError);
}

TEST(Config, ParameterErrorsNameTheKey) {
  EXPECT_EQ(error_key(R"({"experiment":"spectrum","parameters":{"n":2,"nn":3}})"), "parameters.nn");
  EXPECT_EQ(error_key(R"({"experiment":"fock","parameters":{"y":0.5}})"), "parameters.y");
  EXPECT_EQ(error_key(R"({"experiment":"fock","parameters":{"y":"two"}})"), "parameters.y");
  EXPECT_EQ(error_key(R"({"experiment":"spectrum","parameters":{"n":9}})"), "parameters.n");
  EXPECT_EQ(error_key(R"({"experiment":"bound-check","parameters":{"y":1.0}})"), "parameters.y");
  EXPECT_EQ(error_key(R"({"experiment":"fock","parameters":{"y":2}})"), "<none>");
}

TEST(Run, FockWorkedExamplePasses) {
  const auto r = run(config_of(R"({"experiment":"fock","parameters":{"y":2,"k":2}})"));
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(exit_code(r), exit_pass);
  ASSERT_FALSE(r.tables.empty());
  EXPECT_NEAR(r.tables.front().rows.front()[2].get<double>(), 0.25, 1e-12);
}

TEST(Run, DeterministicForFixedSeed) {
  const auto cfg = config_of(R"({"experiment":"bound-check","parameters":{"n":2,"y":3,"k":1,"samples":20},"seed":11})");
  auto a = to_json(run(cfg));
  auto b = to_json(run(cfg));
  a.erase("generated_at");
  b.erase("generated_at");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Report, JsonKeepsNonFiniteValuesAsStrings) {
  Report r;
  r.experiment = "clt";
  r.table("t", {"x"}).add({std::numeric_limits<double>::quiet_NaN()});
  r.check("c", false, std::numeric_limits<double>::infinity(), 1.0);
  const auto j = to_json(r);
  EXPECT_TRUE(j.dump().find("NaN") != std::string::npos || j.dump().find("nan") != std::string::npos);
  EXPECT_FALSE(r.all_pass());
}

TEST(Report, CsvCellsQuoteWhenNeeded) {
  EXPECT_EQ(csv_cell(json("plain")), "plain");
  EXPECT_EQ(csv_cell(json("a,b")), "\"a,b\"");
  EXPECT_EQ(csv_cell(json("say \"x\"")), "\"say \"\"x\"\"\"");
  EXPECT_EQ(std::stod(csv_cell(json(0.1))), 0.1);
  EXPECT_EQ(csv_cell(json(true)), "true");
}

TEST(Report, WritesOneCsvPerTable) {
  const auto dir = std::filesystem::temp_directory_path() / "flab_cli_test";
  std::filesystem::create_directories(dir);
  auto r = run(config_of(R"({"experiment":"fock","parameters":{"y":2}})"));
  const auto files = write_report(r, (dir / "fock.csv").string(), Format::csv);
  ASSERT_EQ(files.size(), r.tables.size() + 1);
  for (const auto& f : files) {
    EXPECT_TRUE(std::filesystem::exists(f));
    const auto body = slurp(f);
    EXPECT_EQ(body.rfind("#", 0), 0u);
  }
  const auto js = write_report(r, (dir / "fock.json").string(), Format::json);
  ASSERT_EQ(js.size(), 1u);
  const auto parsed = json::parse(slurp(js.front()));
  EXPECT_EQ(parsed["experiment"], "fock");
  std::filesystem::remove_all(dir);
}
