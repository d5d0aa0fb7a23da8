#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spinregen/protocol.hpp"

namespace spinregen {

struct ScanSettings {
  double lifetime_step = 250e-9;  // s
  double lifetime_max = 100e-6;   // s
  double tp_max = 90e-6;          // s
  std::size_t tp_samples = 181;
  double calibration_target = 0.98;
  double calibration_tolerance = 0.005;  // relative
};

struct OutputSettings {
  std::string directory = ".";
  std::string format = "csv";  // csv | json
  std::size_t trace_stride = 1;
};

/// Fully resolved run configuration. SI units throughout.
struct RunConfig {
  std::uint64_t master_seed = 1;
  Experiment experiment;
  PulseSequence sequence;
  ScanSettings scan;
  OutputSettings output;

  /// Keys that were absent from the file and took their default value.
  std::vector<std::string> defaulted;
};

inline constexpr int kConfigSchemaVersion = 1;

/// Reference defaults, calibrated gain included.
RunConfig default_config();

/// Parses YAML text. Keys carry their unit as a suffix (temperature_k,
/// waist_um, dt_ns, kappa_per_us, ...). Unknown keys, a wrong unit suffix,
/// missing required keys and out-of-range values throw ValidationError with
/// "<source>:<line>: " in front of the message.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, in the format parse_config reads.
std::string echo_config(const RunConfig& cfg);

/// FNV-1a 64 of echo_config.
std::uint64_t config_hash(const RunConfig& cfg);
std::string config_hash_hex(const RunConfig& cfg);

}  // namespace spinregen
