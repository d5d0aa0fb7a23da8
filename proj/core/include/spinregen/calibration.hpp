#pragma once

#include <vector>

#include "spinregen/protocol.hpp"

namespace spinregen {

struct CalibrationPoint {
  double kappa = 0.0;       // 1/s
  double efficiency = 0.0;  // assisted R1 efficiency
};

struct CalibrationResult {
  double kappa = 0.0;
  double efficiency = 0.0;
  int iterations = 0;
  std::vector<CalibrationPoint> curve;  // every evaluation, in call order
};

/// Bisection on kappa in [0, kMaxGainStep / dt] for the assisted pulse-train R1
/// efficiency. Stops once |efficiency - target| <= tolerance * target.
/// Throws CalibrationError, with the sampled curve in the message, when the
/// target lies outside the bracket.
CalibrationResult calibrate_kappa(double target, const Experiment& exp, double tolerance = 0.005,
                                  int max_iterations = 40);

}  // namespace spinregen
