#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spinregen/fitting.hpp"

using namespace spinregen;

TEST(Fitting, RecoversRelaxationParameters) {
  std::vector<double> t, y;
  for (int i = 0; i <= 180; ++i) {
    t.push_back(0.5e-6 * i);
    y.push_back(0.3 + (0.9 - 0.3) * std::exp(-t.back() / 18e-6));
  }
  const ExponentialFit f = fit_exponential_relaxation(t, y, 1e-8, 1e-2);
  EXPECT_NEAR(f.lifetime, 18e-6, 18e-6 * 1e-6);
  EXPECT_NEAR(f.initial, 0.9, 1e-6);
  EXPECT_NEAR(f.equilibrium, 0.3, 1e-6);
  EXPECT_LT(f.rms_residual, 1e-9);
}

TEST(Fitting, OneOverEInterpolatesLogarithmically) {
  // Pure exponential sampled coarsely: log-linear interpolation is exact.
  std::vector<double> t, y;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(0.3e-6 * i);
    y.push_back(0.9 * std::exp(-t.back() / 1e-6));
  }
  const auto crossing = one_over_e_time(t, y, 0.9);
  ASSERT_TRUE(crossing.has_value());
  EXPECT_NEAR(*crossing, 1e-6, 1e-15);

  const std::vector<double> flat(t.size(), 0.9);
  EXPECT_FALSE(one_over_e_time(t, flat, 0.9).has_value());
}

TEST(Fitting, GaussianShapeResidual) {
  std::vector<double> t, gauss, square;
  for (int i = -40; i <= 40; ++i) {
    t.push_back(i * 2e-9);
    gauss.push_back(3.0 * std::exp(-0.5 * std::pow(t.back() / 30e-9, 2)));
    square.push_back(std::abs(t.back()) < 40e-9 ? 1.0 : 0.0);
  }
  EXPECT_LT(gaussian_shape_residual(t, gauss), 1e-6);
  EXPECT_GT(gaussian_shape_residual(t, square), 0.05);
}
