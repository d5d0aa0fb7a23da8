#include "spinregen/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "spinregen/error.hpp"

namespace spinregen {

namespace {

double assisted_r1(double kappa, const Experiment& base) {
  Experiment exp = base;
  exp.gain.kappa = kappa;
  RunOptions options;
  options.trace_stride = 1000000;
  return run_sequence(fig2_sequence(true, true, exp.dt), exp, options).reads.at(0).efficiency;
}

std::string describe(const std::vector<CalibrationPoint>& curve) {
  std::string text;
  char buf[96];
  for (const CalibrationPoint& p : curve) {
    std::snprintf(buf, sizeof buf, "\n  kappa=%.6g /s -> R1=%.6g", p.kappa, p.efficiency);
    text += buf;
  }
  return text;
}

}  // namespace

CalibrationResult calibrate_kappa(double target, const Experiment& exp, double tolerance, int max_iterations) {
  if (!(target > 0.0) || !std::isfinite(target)) throw ValidationError("calibration target must be positive");
  if (!(tolerance > 0.0)) throw ValidationError("calibration tolerance must be positive");

  CalibrationResult result;
  auto eval = [&](double kappa) {
    const double eff = assisted_r1(kappa, exp);
    result.curve.push_back({kappa, eff});
    return eff;
  };

  double lo = 0.0;
  double hi = kMaxGainStep / exp.dt;
  double f_lo = eval(lo);
  if (std::abs(f_lo - target) <= tolerance * target) {
    result.kappa = lo;
    result.efficiency = f_lo;
    return result;
  }
  double f_hi = eval(hi);
  if (!((f_lo - target) * (f_hi - target) < 0.0)) {
    for (int i = 1; i < 4; ++i) eval(hi * i / 4.0);
    throw CalibrationError("target efficiency " + std::to_string(target) +
                           " is not bracketed by kappa in [0, " + std::to_string(hi) + "] /s:" +
                           describe(result.curve));
  }

  for (int it = 1; it <= max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = eval(mid);
    result.iterations = it;
    result.kappa = mid;
    result.efficiency = f_mid;
    if (std::abs(f_mid - target) <= tolerance * target) return result;
    if ((f_mid - target) * (f_lo - target) < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  throw CalibrationError("calibration did not converge within " + std::to_string(max_iterations) +
                         " iterations:" + describe(result.curve));
}

}  // namespace spinregen
