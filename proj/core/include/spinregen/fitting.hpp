#pragma once

#include <optional>
#include <span>

namespace spinregen {

/// value(t) = equilibrium + (initial - equilibrium) exp(-t / lifetime)
struct ExponentialFit {
  double lifetime = 0.0;
  double initial = 0.0;
  double equilibrium = 0.0;
  double rms_residual = 0.0;
};

/// Least-squares relaxation fit. For a trial lifetime the two amplitudes are
/// linear, so the lifetime is found by a golden-section search on the profiled
/// residual over [lifetime_min, lifetime_max].
ExponentialFit fit_exponential_relaxation(std::span<const double> t, std::span<const double> value,
                                          double lifetime_min, double lifetime_max);

/// First time at which `value` falls below reference / e, by linear
/// interpolation of log(value) between bracketing samples. Empty if the curve
/// never crosses.
std::optional<double> one_over_e_time(std::span<const double> t, std::span<const double> value,
                                      double reference);

/// Relative rms residual of the best Gaussian fit to a pulse shape,
/// normalised by the pulse peak. Smaller means a more regular pulse.
double gaussian_shape_residual(std::span<const double> t, std::span<const double> value);

}  // namespace spinregen
