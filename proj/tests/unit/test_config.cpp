#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include "spinregen/config.hpp"
#include "spinregen/error.hpp"

using namespace spinregen;

namespace {

const char* kMinimal = R"(schema_version: 1
ensemble:
  temperature_k: 345.15
  n_atoms: 1000
)";

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.yaml");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST(Config, ShippedDefaultLoadsCleanly) {
  const RunConfig cfg = load_config(SPINREGEN_DEFAULT_CONFIG);
  EXPECT_TRUE(cfg.defaulted.empty());
  EXPECT_EQ(echo_config(cfg), echo_config(default_config()));
  EXPECT_EQ(cfg.experiment.gain.kappa, kDefaultKappa);
  EXPECT_EQ(cfg.experiment.ensemble.n_atoms, 200000u);
}

TEST(Config, MinimalConfigTakesDefaults) {
  const RunConfig cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.experiment.ensemble.n_atoms, 1000u);
  EXPECT_DOUBLE_EQ(cfg.experiment.ensemble.cell_radius, 10e-3);
  const auto& d = cfg.defaulted;
  EXPECT_NE(std::find(d.begin(), d.end(), "ensemble.cell_radius_mm"), d.end());
  EXPECT_NE(std::find(d.begin(), d.end(), "sequence.events"), d.end());
  EXPECT_TRUE(contains(echo_config(cfg), "cell_radius_mm: 10"));
}

TEST(Config, NegativeTemperatureNamesKeyAndLine) {
  const std::string msg = error_of("schema_version: 1\nensemble:\n  temperature_k: -5\n  n_atoms: 10\n");
  EXPECT_TRUE(contains(msg, "test.yaml:3:")) << msg;
  EXPECT_TRUE(contains(msg, "temperature_k")) << msg;
}

TEST(Config, UnknownKeyRejectedWithLine) {
  const std::string msg = error_of(std::string(kMinimal) + "gain:\n  kapa_per_us: 3\n");
  EXPECT_TRUE(contains(msg, "test.yaml:6:")) << msg;
  EXPECT_TRUE(contains(msg, "unknown key 'gain.kapa_per_us'")) << msg;
}

TEST(Config, UnitMismatchRejected) {
  const std::string msg = error_of(std::string(kMinimal) + "  cell_length_m: 0.075\n");
  EXPECT_TRUE(contains(msg, "test.yaml:5:")) << msg;
  EXPECT_TRUE(contains(msg, "unit mismatch")) << msg;
  EXPECT_TRUE(contains(msg, "cell_length_mm")) << msg;
}

TEST(Config, MissingRequiredKeyReported) {
  const std::string msg = error_of("schema_version: 1\nensemble:\n  temperature_k: 300\n");
  EXPECT_TRUE(contains(msg, "test.yaml:2:")) << msg;
  EXPECT_TRUE(contains(msg, "ensemble.n_atoms")) << msg;
  EXPECT_TRUE(contains(error_of("ensemble:\n  n_atoms: 3\n"), "schema_version"));
}

TEST(Config, DuplicateKeyAndSyntaxErrors) {
  EXPECT_TRUE(contains(error_of(std::string(kMinimal) + "  n_atoms: 20\n"), "duplicate key"));
  EXPECT_TRUE(contains(error_of("schema_version: 1\nensemble: [1, 2\n"), "parse error"));
}

TEST(Config, EventsParsedInUnits) {
  const RunConfig cfg = parse_config(std::string(kMinimal) + R"(sequence:
  dt_ns: 5
  events:
    - {kind: pump, start_ns: -700, duration_ns: 1015, power_mw: 23, detuning_ghz: 0}
    - {kind: write, start_ns: 415, duration_ns: 70, energy_nj: 2, detuning_ghz: -2.9, signal_pj: 13}
    - {kind: read, start_ns: 1135, duration_ns: 70, energy_nj: 2, detuning_ghz: -2.9}
)");
  ASSERT_EQ(cfg.sequence.events.size(), 3u);
  EXPECT_DOUBLE_EQ(cfg.sequence.dt, 5e-9);
  EXPECT_DOUBLE_EQ(cfg.experiment.dt, 5e-9);
  EXPECT_DOUBLE_EQ(cfg.sequence.events[1].signal_energy, 13e-12);
  EXPECT_DOUBLE_EQ(cfg.sequence.events[1].detuning, -2.9e9);
  EXPECT_TRUE(contains(error_of(std::string(kMinimal) + "sequence:\n  events:\n    - {kind: read, start_ns: 1, "
                                                       "duration_ns: 70, power_mw: 3}\n"),
                       "unit mismatch"));
}

TEST(Config, EchoRoundTrip) {
  RunConfig cfg = parse_config(std::string(kMinimal) + "master_seed: 42\nbeams:\n  probe:\n    waist_um: 123.4\n");
  const std::string echo = echo_config(cfg);
  const RunConfig again = parse_config(echo, "echo");
  EXPECT_EQ(echo_config(again), echo);
  EXPECT_EQ(config_hash(again), config_hash(cfg));
  EXPECT_EQ(again.master_seed, 42u);
  EXPECT_DOUBLE_EQ(again.experiment.beams.probe.waist, cfg.experiment.beams.probe.waist);
  EXPECT_TRUE(again.defaulted.empty());
  EXPECT_EQ(config_hash_hex(cfg).size(), 16u);
}

TEST(Config, MissingFileIsValidationError) {
  EXPECT_THROW(load_config("/nonexistent/spinregen.yaml"), ValidationError);
}
