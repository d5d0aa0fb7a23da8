#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "spinregen/error.hpp"
#include "spinregen/output.hpp"

using namespace spinregen;

namespace {

const RunStamp kStamp{"unit", "0123456789abcdef", 7};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Output, NineSignificantDigits) {
  EXPECT_EQ(format_sig9(1.0 / 3.0), "0.333333333");
  EXPECT_EQ(format_sig9(123456789012.0), "1.23456789e+11");
  EXPECT_EQ(format_sig9(0.0), "0");
  EXPECT_EQ(format_sig9(std::nan("")), "nan");
  EXPECT_EQ(format_sig9(-1.0 / 0.0), "-inf");
}

TEST(Output, EmptyGridGivesHeaderOnlyCsv) {
  Table t;
  t.add("time_s", {});
  t.add("S_leak", {});
  std::ostringstream out;
  write_csv(out, t, kStamp);
  EXPECT_EQ(out.str(),
            "# spinregen 0.1.0 command=unit\n"
            "# config_hash=0123456789abcdef master_seed=7\n"
            "time_s,S_leak\n");
}

TEST(Output, CsvRows) {
  Table t;
  t.add("time_s", {0.0, 1e-8});
  t.add("RE", {0.9, 2.0 / 3.0});
  std::ostringstream out;
  write_csv(out, t, kStamp);
  EXPECT_NE(out.str().find("time_s,RE\n0,0.9\n1e-08,0.666666667\n"), std::string::npos);
  EXPECT_THROW(t.add("short", {1.0}), ContractViolation);
}

TEST(Output, JsonTableAndSummary) {
  Table t;
  t.add("delay_s", {1e-7, 2e-7});
  std::ostringstream table;
  write_table_json(table, t, kStamp);
  const auto doc = nlohmann::json::parse(table.str());
  EXPECT_EQ(doc["stamp"]["config_hash"], "0123456789abcdef");
  EXPECT_EQ(doc["stamp"]["master_seed"], 7);
  EXPECT_EQ(doc["columns"]["delay_s"].size(), 2u);

  RunSummary s;
  s.stamp = kStamp;
  s.kappa = 3.125e6;
  s.headline = {{"S_out_A", 1.0 / 3.0}, {"missing", std::nan("")}};
  s.checks = {{"ok", true}};
  s.defaults_applied = {"ensemble.cell_radius_mm"};
  s.config_echo = "schema_version: 1\n";
  std::ostringstream summary;
  write_summary_json(summary, s);
  const auto sum = nlohmann::json::parse(summary.str());
  EXPECT_EQ(sum["stamp"]["schema_version"], kSummarySchemaVersion);
  EXPECT_EQ(sum["stamp"]["version"], "0.1.0");
  EXPECT_DOUBLE_EQ(sum["kappa_per_s"].get<double>(), 3.125e6);
  EXPECT_DOUBLE_EQ(sum["headline"]["S_out_A"].get<double>(), 0.333333333);
  EXPECT_TRUE(sum["headline"]["missing"].is_null());
  EXPECT_EQ(sum["defaults_applied"][0], "ensemble.cell_radius_mm");
}

TEST(Output, EmitIsByteIdenticalAndReportsBadPaths) {
  const auto dir = std::filesystem::temp_directory_path() / "spinregen_output_test";
  std::filesystem::remove_all(dir);
  Table t;
  t.add("time_s", {0.0, 1e-9, 2e-9});
  t.add("S_out_A", {0.1, 0.2, 0.3});
  const auto a = emit_traces(t, kStamp, "csv", dir / "a", "fig2");
  const auto b = emit_traces(t, kStamp, "csv", dir / "b", "fig2");
  EXPECT_EQ(a.filename(), "fig2.csv");
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(emit_traces(t, kStamp, "json", dir, "fig2").extension(), ".json");
  EXPECT_THROW(emit_traces(t, kStamp, "xml", dir, "fig2"), ValidationError);

  // A regular file where a directory is expected.
  std::ofstream(dir / "blocker") << "x";
  try {
    emit_traces(t, kStamp, "csv", dir / "blocker", "fig2");
    FAIL() << "expected SimulationError";
  } catch (const SimulationError& e) {
    EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
