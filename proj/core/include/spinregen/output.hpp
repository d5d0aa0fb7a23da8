#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace spinregen {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr int kSummarySchemaVersion = 1;

/// Column-major numeric table; column names carry their unit (time_s, ...).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column, equal lengths

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  void add(std::string name, std::vector<double> values);
};

/// Provenance written into every output file.
struct RunStamp {
  std::string command;
  std::string config_hash;
  std::uint64_t master_seed = 0;
};

struct RunSummary {
  RunStamp stamp;
  std::optional<double> kappa;  // 1/s, when calibrated or used
  std::vector<std::pair<std::string, double>> headline;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::string> defaults_applied;
  std::string config_echo;
};

/// %.9g; nan and inf spelled "nan", "inf", "-inf".
std::string format_sig9(double v);

/// Two '#' comment lines (stamp), then the header row, then one line per row.
void write_csv(std::ostream& out, const Table& table, const RunStamp& stamp);
/// {"stamp": ..., "columns": {name: [values...]}}.
void write_table_json(std::ostream& out, const Table& table, const RunStamp& stamp);
void write_summary_json(std::ostream& out, const RunSummary& summary);

/// Writes `table` as <dir>/<stem>.csv or .json. Throws SimulationError naming
/// the path when the file cannot be written.
std::filesystem::path emit_traces(const Table& table, const RunStamp& stamp, const std::string& format,
                                  const std::filesystem::path& dir, const std::string& stem);
std::filesystem::path emit_summary(const RunSummary& summary, const std::filesystem::path& dir,
                                   const std::string& stem);

}  // namespace spinregen
