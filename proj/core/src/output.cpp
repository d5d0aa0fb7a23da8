#include "spinregen/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>

#include "spinregen/error.hpp"

namespace spinregen {

namespace {

using nlohmann::ordered_json;

// Round-trips through %.9g so the JSON printer, which emits the shortest
// representation, never shows more than nine significant digits.
ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_sig9(v).c_str(), nullptr);
}

ordered_json stamp_json(const RunStamp& s) {
  return {{"command", s.command},
          {"version", std::string(kVersion)},
          {"schema_version", kSummarySchemaVersion},
          {"config_hash", s.config_hash},
          {"master_seed", s.master_seed}};
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SimulationError("cannot write output file '" + path.string() + "'");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw SimulationError("write failed for '" + path.string() + "'");
}

}  // namespace

void Table::add(std::string name, std::vector<double> values) {
  if (!data.empty() && values.size() != rows()) {
    throw ContractViolation("column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                            std::to_string(rows()));
  }
  columns.push_back(std::move(name));
  data.push_back(std::move(values));
}

std::string format_sig9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& table, const RunStamp& stamp) {
  out << "# spinregen " << kVersion << " command=" << stamp.command << "\n";
  out << "# config_hash=" << stamp.config_hash << " master_seed=" << stamp.master_seed << "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << "\n";
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_sig9(table.data[c][r]);
    out << "\n";
  }
}

void write_table_json(std::ostream& out, const Table& table, const RunStamp& stamp) {
  ordered_json doc;
  doc["stamp"] = stamp_json(stamp);
  ordered_json cols = ordered_json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    ordered_json values = ordered_json::array();
    for (double v : table.data[c]) values.push_back(number(v));
    cols[table.columns[c]] = std::move(values);
  }
  doc["columns"] = std::move(cols);
  out << doc.dump(2) << "\n";
}

void write_summary_json(std::ostream& out, const RunSummary& s) {
  ordered_json doc;
  doc["stamp"] = stamp_json(s.stamp);
  doc["kappa_per_s"] = s.kappa ? number(*s.kappa) : ordered_json(nullptr);
  ordered_json headline = ordered_json::object();
  for (const auto& [k, v] : s.headline) headline[k] = number(v);
  doc["headline"] = std::move(headline);
  ordered_json checks = ordered_json::object();
  for (const auto& [k, v] : s.checks) checks[k] = v;
  doc["checks"] = std::move(checks);
  doc["defaults_applied"] = s.defaults_applied;
  doc["config"] = s.config_echo;
  out << doc.dump(2) << "\n";
}

std::filesystem::path emit_traces(const Table& table, const RunStamp& stamp, const std::string& format,
                                  const std::filesystem::path& dir, const std::string& stem) {
  if (format != "csv" && format != "json") throw ValidationError("unknown output format '" + format + "'");
  const std::filesystem::path path = dir / (stem + "." + format);
  std::ofstream out = open_for_write(path);
  if (format == "csv") {
    write_csv(out, table, stamp);
  } else {
    write_table_json(out, table, stamp);
  }
  check_written(out, path);
  return path;
}

std::filesystem::path emit_summary(const RunSummary& summary, const std::filesystem::path& dir,
                                   const std::string& stem) {
  const std::filesystem::path path = dir / (stem + "_summary.json");
  std::ofstream out = open_for_write(path);
  write_summary_json(out, summary);
  check_written(out, path);
  return path;
}

}  // namespace spinregen
