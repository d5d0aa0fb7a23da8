#include "spinregen/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinregen/error.hpp"

namespace spinregen {

namespace {

struct LinearFit {
  double equilibrium = 0.0;
  double amplitude = 0.0;
  double sse = 0.0;
};

// Best equilibrium + amplitude * exp(-t/lifetime) for a fixed lifetime.
LinearFit profile(std::span<const double> t, std::span<const double> y, double lifetime) {
  double s0 = 0, s1 = 0, s11 = 0, sy = 0, s1y = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = std::exp(-t[i] / lifetime);
    s0 += 1.0;
    s1 += e;
    s11 += e * e;
    sy += y[i];
    s1y += e * y[i];
  }
  const double det = s0 * s11 - s1 * s1;
  LinearFit f;
  if (std::abs(det) < 1e-300) {
    f.equilibrium = sy / s0;
  } else {
    f.equilibrium = (s11 * sy - s1 * s1y) / det;
    f.amplitude = (s0 * s1y - s1 * sy) / det;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - f.equilibrium - f.amplitude * std::exp(-t[i] / lifetime);
    f.sse += r * r;
  }
  return f;
}

}  // namespace

ExponentialFit fit_exponential_relaxation(std::span<const double> t, std::span<const double> value,
                                          double lifetime_min, double lifetime_max) {
  if (t.size() != value.size() || t.size() < 3) throw ValidationError("exponential fit needs >= 3 matched samples");
  if (!(lifetime_min > 0.0 && lifetime_max > lifetime_min)) throw ValidationError("bad lifetime bracket");

  // Golden-section search in log(lifetime).
  double a = std::log(lifetime_min);
  double b = std::log(lifetime_max);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = profile(t, value, std::exp(c)).sse;
  double fd = profile(t, value, std::exp(d)).sse;
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = profile(t, value, std::exp(c)).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = profile(t, value, std::exp(d)).sse;
    }
  }
  const double lifetime = std::exp(0.5 * (a + b));
  const LinearFit best = profile(t, value, lifetime);
  return {lifetime, best.equilibrium + best.amplitude, best.equilibrium,
          std::sqrt(best.sse / static_cast<double>(t.size()))};
}

std::optional<double> one_over_e_time(std::span<const double> t, std::span<const double> value,
                                      double reference) {
  if (t.size() != value.size()) throw ValidationError("time and value lengths differ");
  const double threshold = reference / std::exp(1.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (value[i] < threshold && value[i - 1] >= threshold) {
      if (value[i] <= 0.0) return t[i - 1] + (t[i] - t[i - 1]) * (value[i - 1] - threshold) / (value[i - 1] - value[i]);
      const double l0 = std::log(value[i - 1]);
      const double l1 = std::log(value[i]);
      const double lt = std::log(threshold);
      return t[i - 1] + (t[i] - t[i - 1]) * (l0 - lt) / (l0 - l1);
    }
  }
  if (!t.empty() && value[0] < threshold) return t[0];
  return std::nullopt;
}

double gaussian_shape_residual(std::span<const double> t, std::span<const double> value) {
  if (t.size() != value.size() || t.size() < 3) throw ValidationError("shape residual needs >= 3 samples");
  double total = 0.0, mean = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    total += value[i];
    mean += value[i] * t[i];
    peak = std::max(peak, value[i]);
  }
  if (total <= 0.0 || peak <= 0.0) return 0.0;
  mean /= total;

  // Zooming grid over centre and width; amplitude solved in closed form.
  double var = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) var += value[i] * (t[i] - mean) * (t[i] - mean);
  const double sigma0 = std::sqrt(std::max(var / total, 1e-30));
  const auto sse_at = [&](double centre, double sigma) {
    double gy = 0.0, gg = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = (t[i] - centre) / sigma;
      const double gi = std::exp(-0.5 * x * x);
      gy += gi * value[i];
      gg += gi * gi;
    }
    const double amp = gg > 0.0 ? gy / gg : 0.0;
    double sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = (t[i] - centre) / sigma;
      const double r = value[i] - amp * std::exp(-0.5 * x * x);
      sse += r * r;
    }
    return sse;
  };
  double best = std::numeric_limits<double>::infinity();
  double best_centre = mean, best_sigma = sigma0;
  double span_c = 0.5 * sigma0, span_s = 0.5 * sigma0;
  for (int level = 0; level < 10; ++level) {
    const double c0 = best_centre, s0 = best_sigma;
    for (int ci = -10; ci <= 10; ++ci) {
      const double centre = c0 + 0.1 * ci * span_c;
      for (int si = -10; si <= 10; ++si) {
        const double sigma = s0 + 0.1 * si * span_s;
        if (sigma <= 0.0) continue;
        const double sse = sse_at(centre, sigma);
        if (sse < best) {
          best = sse;
          best_centre = centre;
          best_sigma = sigma;
        }
      }
    }
    span_c *= 0.2;
    span_s *= 0.2;
  }
  return std::sqrt(best / static_cast<double>(t.size())) / peak;
}

}  // namespace spinregen
