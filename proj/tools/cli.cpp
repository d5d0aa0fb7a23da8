#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinregen/calibration.hpp"
#include "spinregen/config.hpp"
#include "spinregen/error.hpp"
#include "spinregen/gain_oracle.hpp"
#include "spinregen/output.hpp"
#include "spinregen/protocol.hpp"
#include "spinregen/regeneration.hpp"

namespace spinregen::cli {

namespace {

constexpr double kOracleTolerance = 1e-8;
constexpr double kReferenceRawNoise = 0.012;  // detected noise photons per read

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string format;
};

// Everything a subcommand needs once flags and config are merged.
struct Context {
  RunConfig cfg;
  std::filesystem::path dir;
  std::string format;
  std::ostream* out = nullptr;
};

Context make_context(const GlobalOptions& g, std::ostream& out) {
  Context ctx;
  ctx.cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed) {
    ctx.cfg.master_seed = *g.seed;
    ctx.cfg.experiment.ensemble.rng_seed = *g.seed;
  }
  ctx.dir = g.out_dir.empty() ? std::filesystem::path(ctx.cfg.output.directory) : std::filesystem::path(g.out_dir);
  ctx.format = g.format.empty() ? ctx.cfg.output.format : g.format;
  if (ctx.format != "csv" && ctx.format != "json") {
    throw ValidationError("--format must be csv or json (got '" + ctx.format + "')");
  }
  ctx.out = &out;
  return ctx;
}

RunStamp stamp_for(const Context& ctx, const std::string& command) {
  return {command, config_hash_hex(ctx.cfg), ctx.cfg.master_seed};
}

RunSummary summary_for(const Context& ctx, const std::string& command) {
  RunSummary s;
  s.stamp = stamp_for(ctx, command);
  s.kappa = ctx.cfg.experiment.gain.kappa;
  s.defaults_applied = ctx.cfg.defaulted;
  s.config_echo = echo_config(ctx.cfg);
  return s;
}

void print_headline(const Context& ctx, const RunSummary& s) {
  for (const auto& [key, value] : s.headline) *ctx.out << key << " = " << format_sig9(value) << "\n";
  for (const auto& [key, ok] : s.checks) *ctx.out << key << " = " << (ok ? "true" : "false") << "\n";
}

void finish(const Context& ctx, const RunSummary& summary, const std::string& stem) {
  print_headline(ctx, summary);
  const auto path = emit_summary(summary, ctx.dir, stem);
  *ctx.out << "wrote " << path.string() << "\n";
}

void write_table(const Context& ctx, const Table& table, const std::string& command, const std::string& stem) {
  const auto path = emit_traces(table, stamp_for(ctx, command), ctx.format, ctx.dir, stem);
  *ctx.out << "wrote " << path.string() << "\n";
}

CalibrationResult run_calibration(Context& ctx) {
  const ScanSettings& scan = ctx.cfg.scan;
  CalibrationResult r = calibrate_kappa(scan.calibration_target, ctx.cfg.experiment, scan.calibration_tolerance);
  ctx.cfg.experiment.gain.kappa = r.kappa;
  return r;
}

int cmd_simulate(Context& ctx) {
  RunOptions options;
  options.trace_stride = ctx.cfg.output.trace_stride;
  const TraceResult r = run_sequence(ctx.cfg.sequence, ctx.cfg.experiment, options);

  Table t;
  t.add("time_s", r.time);
  t.add("signal_out_per_s", r.signal_out);
  t.add("leak_out_per_s", r.leak_out);
  t.add("mode_excitation", r.mode_excitation);
  t.add("stored_excitation", r.stored);
  t.add("pop1", r.pop1);
  t.add("pop2", r.pop2);
  t.add("transmission", r.transmission);
  t.add("noise_excitation", r.noise);
  write_table(ctx, t, "simulate", "simulate");

  RunSummary s = summary_for(ctx, "simulate");
  s.headline.emplace_back("write_efficiency", r.write_efficiency);
  s.headline.emplace_back("leaked_fraction", r.leaked_fraction);
  for (std::size_t i = 0; i < r.reads.size(); ++i) {
    const std::string tag = "R" + std::to_string(i + 1);
    s.headline.emplace_back(tag + "_time_s", r.reads[i].centre);
    s.headline.emplace_back(tag + "_efficiency", r.reads[i].efficiency);
    s.headline.emplace_back(tag + "_noise", r.reads[i].noise);
  }
  finish(ctx, s, "simulate");
  return kExitOk;
}

int cmd_fig2(Context& ctx, bool calibrate) {
  std::optional<CalibrationResult> cal;
  if (calibrate) cal = run_calibration(ctx);
  const Fig2Result f = fig2_experiment(ctx.cfg.experiment);

  const std::size_t n = f.no_assist.time.size();
  if (f.assist.time.size() != n || f.assist_no_signal.time.size() != n) {
    throw SimulationError("fig2 conditions produced different time grids");
  }
  Table t;
  t.add("time_s", f.no_assist.time);
  t.add("S_leak", f.no_assist.leak_out);
  t.add("S_out_noA", f.no_assist.signal_out);
  t.add("S_out_A", f.assist.signal_out);
  t.add("S_out_A_noSin", f.assist_no_signal.signal_out);
  write_table(ctx, t, "fig2", "fig2");

  RunSummary s = summary_for(ctx, "fig2");
  s.headline = {{"S_leak", f.s_leak},
                {"S_out_noA", f.s_out_noA},
                {"R2_noA", f.r2_noA},
                {"S_out_A", f.s_out_A},
                {"R2_A", f.r2_A},
                {"S_out_A_noSin", f.s_out_A_noSin},
                {"R2_A_noSin", f.r2_A_noSin},
                {"shape_residual_noA", f.shape_residual_noA},
                {"shape_residual_A", f.shape_residual_A}};
  if (cal) s.headline.emplace_back("calibration_evaluations", static_cast<double>(cal->curve.size()));
  finish(ctx, s, "fig2");
  return kExitOk;
}

int cmd_lifetime(Context& ctx, bool assist, bool full, bool calibrate) {
  if (calibrate) run_calibration(ctx);
  const ScanSettings& scan = ctx.cfg.scan;
  std::vector<double> delays;
  const auto n = static_cast<std::size_t>(std::floor(scan.lifetime_max / scan.lifetime_step + 1e-9));
  for (std::size_t i = 1; i <= n; ++i) delays.push_back(static_cast<double>(i) * scan.lifetime_step);

  const LifetimeCurve c = lifetime_scan(delays, assist, ctx.cfg.experiment, !full);
  const std::string stem = assist ? "lifetime_A" : "lifetime_noA";
  Table t;
  t.add("delay_s", c.delay);
  t.add("RE", c.efficiency);
  write_table(ctx, t, "lifetime-scan", stem);

  RunSummary s = summary_for(ctx, "lifetime-scan");
  s.headline.emplace_back("RE_zero_delay", c.reference);
  s.headline.emplace_back("one_over_e_time_s", c.one_over_e.value_or(std::nan("")));
  s.headline.emplace_back("RE_peak", c.efficiency.empty() ? c.reference
                                                           : *std::max_element(c.efficiency.begin(),
                                                                               c.efficiency.end()));
  s.checks.emplace_back("crossed_one_over_e", c.one_over_e.has_value());
  finish(ctx, s, stem);
  return kExitOk;
}

int cmd_tp(Context& ctx) {
  const ScanSettings& scan = ctx.cfg.scan;
  const TpCurve dark = tp_experiment(false, ctx.cfg.experiment, scan.tp_max, scan.tp_samples);
  const TpCurve lit = tp_experiment(true, ctx.cfg.experiment, scan.tp_max, scan.tp_samples);

  Table t;
  t.add("time_s", dark.time);
  t.add("TP_noA", dark.transmission);
  t.add("TP_A", lit.transmission);
  t.add("pop1_noA", dark.pop1);
  t.add("pop1_A", lit.pop1);
  write_table(ctx, t, "tp-scan", "tp");

  RunSummary s = summary_for(ctx, "tp-scan");
  s.headline = {{"dark_lifetime_fit_s", dark.fitted_lifetime},
                {"assisted_lifetime_fit_s", lit.fitted_lifetime},
                {"TP_initial", dark.tp_initial},
                {"TP_equilibrium", dark.tp_equilibrium}};
  finish(ctx, s, "tp");
  return kExitOk;
}

int cmd_calibrate(Context& ctx) {
  const CalibrationResult r = run_calibration(ctx);
  Table t;
  std::vector<double> kappa, eff;
  for (const CalibrationPoint& p : r.curve) {
    kappa.push_back(p.kappa);
    eff.push_back(p.efficiency);
  }
  t.add("kappa_per_s", kappa);
  t.add("S_out_A", eff);
  write_table(ctx, t, "calibrate", "calibration");

  RunSummary s = summary_for(ctx, "calibrate");
  s.headline = {{"kappa_per_s", r.kappa},
                {"S_out_A", r.efficiency},
                {"target", ctx.cfg.scan.calibration_target},
                {"iterations", static_cast<double>(r.iterations)}};
  finish(ctx, s, "calibration");
  return kExitOk;
}

int cmd_oracle(Context& ctx) {
  Table t;
  std::vector<double> n0s, kts, mean_err, var_err;
  double worst = 0.0;
  for (int n0 = 0; n0 <= 5; ++n0) {
    for (int i = 0; i <= 8; ++i) {
      const double kt = 0.25 * i;
      const OracleResult o = converged_gain_oracle(n0, kt);
      const double dm = std::abs(mean_excitation(n0, 1.0, kt) - o.mean);
      const double dv = std::abs(excitation_variance(n0, 1.0, kt) - o.variance);
      n0s.push_back(n0);
      kts.push_back(kt);
      mean_err.push_back(dm);
      var_err.push_back(dv);
      worst = std::max({worst, dm, dv});
    }
  }
  t.add("n0", n0s);
  t.add("kappa_t", kts);
  t.add("mean_abs_error", mean_err);
  t.add("variance_abs_error", var_err);
  write_table(ctx, t, "oracle-check", "oracle_check");

  const bool pass = worst < kOracleTolerance;
  *ctx.out << "max |closed form - oracle| = " << format_sig9(worst) << (pass ? " (ok)" : " (exceeds 1e-8)") << "\n";
  return pass ? kExitOk : kExitRuntime;
}

int cmd_noise(Context& ctx, double raw, std::optional<double> eta) {
  const double value = noise_budget(raw, eta.value_or(ctx.cfg.experiment.memory.detection_efficiency));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", value);
  *ctx.out << buf << "\n";
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Warm-vapour Raman memory with spin-wave regeneration", "spinregen"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "YAML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed (overrides master_seed)");
  app.add_option("--out", g.out_dir, "Output directory (overrides output.directory)");
  app.add_option("--format", g.format, "Trace format")->check(CLI::IsMember({"csv", "json"}));

  auto* simulate = app.add_subcommand("simulate", "Run the configured pulse sequence");
  auto* fig2 = app.add_subcommand("fig2", "Leak and retrieval with and without assisted light");
  bool fig2_calibrate = false;
  fig2->add_flag("--calibrate", fig2_calibrate, "Calibrate kappa before running");

  auto* lifetime = app.add_subcommand("lifetime-scan", "Retrieval efficiency against storage time");
  bool assist = false, full = false, life_calibrate = false;
  lifetime->add_flag("--assist", assist, "Assisted light on during storage");
  lifetime->add_flag("--full", full, "Scan every delay instead of stopping past 1/e");
  lifetime->add_flag("--calibrate", life_calibrate, "Calibrate kappa before scanning");

  auto* tp = app.add_subcommand("tp-scan", "Probe transmission after pump shut-off");
  auto* calibrate = app.add_subcommand("calibrate", "Fit kappa to the assisted R1 efficiency");
  auto* oracle = app.add_subcommand("oracle-check", "Gain closed forms against number-basis numerics");

  auto* noise = app.add_subcommand("noise-budget", "Intrinsic noise photons from raw counts");
  double raw = kReferenceRawNoise;
  std::optional<double> eta;
  noise->add_option("--raw", raw, "Detected noise photons per read");
  noise->add_option("--eta", eta, "Detection efficiency (default memory.detection_efficiency)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (!args.empty() && args.front().rfind('-', 0) != 0 && app.get_subcommands().empty()) {
      err << "error: unknown subcommand '" << args.front() << "'\n";
    } else if (!args.empty()) {
      err << "error: " << e.what() << "\n";
    }
    err << app.help();
    return kExitValidation;
  }

  try {
    Context ctx = make_context(g, out);
    if (*simulate) return cmd_simulate(ctx);
    if (*fig2) return cmd_fig2(ctx, fig2_calibrate);
    if (*lifetime) return cmd_lifetime(ctx, assist, full, life_calibrate);
    if (*tp) return cmd_tp(ctx);
    if (*calibrate) return cmd_calibrate(ctx);
    if (*oracle) return cmd_oracle(ctx);
    if (*noise) return cmd_noise(ctx, raw, eta);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace spinregen::cli
