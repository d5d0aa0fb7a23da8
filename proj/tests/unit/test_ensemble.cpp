#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/error.hpp"

using namespace spinregen;

namespace {

EnsembleConfig small_cfg(std::size_t n, double temperature = 345.15) {
  EnsembleConfig cfg;
  cfg.n_atoms = n;
  cfg.temperature = temperature;
  cfg.rng_seed = 7;
  return cfg;
}

double sample_mean_speed(const std::vector<Atom>& atoms) {
  double s = 0.0;
  for (const Atom& a : atoms) s += norm(a.velocity);
  return s / static_cast<double>(atoms.size());
}

}  // namespace

TEST(Ensemble, MeanSpeedMatchesHandEvaluation) {
  SpeciesConstants cs = cesium133();
  cs.atomic_mass = 2.207e-25;
  EXPECT_NEAR(mean_thermal_speed(cs, 345.15), 234.5, 0.5);
}

TEST(Ensemble, MeanSpeedScalesAsRootTemperature) {
  const SpeciesConstants cs = cesium133();
  EXPECT_DOUBLE_EQ(mean_thermal_speed(cs, 4.0 * 300.0), 2.0 * mean_thermal_speed(cs, 300.0));
}

TEST(Ensemble, HeavyAtomIsFrozen) {
  SpeciesConstants heavy = cesium133();
  heavy.atomic_mass = 1.0;
  EXPECT_LT(mean_thermal_speed(heavy, 345.15), 1e-9);
}

TEST(Ensemble, SampledMeanSpeedWithinTwoPercent) {
  const auto atoms = sample_ensemble(small_cfg(100000));
  // sqrt(8 k T / (pi m)) with k and m written out independently of the library.
  const double expected = std::sqrt(8.0 * 1.380649e-23 * 345.15 / (3.141592653589793 * 2.20694650e-25));
  EXPECT_NEAR(sample_mean_speed(atoms), expected, 0.02 * expected);
}

TEST(Ensemble, ColdGasIsSlow) {
  const auto atoms = sample_ensemble(small_cfg(10000, 1e-6));
  for (const Atom& a : atoms) ASSERT_LT(norm(a.velocity), 1.0);
}

TEST(Ensemble, SamplingIsDeterministic) {
  const auto a = sample_ensemble(small_cfg(5000));
  const auto b = sample_ensemble(small_cfg(5000));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].position, b[i].position);
    ASSERT_EQ(a[i].velocity, b[i].velocity);
  }
}

TEST(Ensemble, NegativeTemperatureRejected) {
  EXPECT_THROW(validate(small_cfg(10, -5.0)), ValidationError);
  EXPECT_THROW(sample_ensemble(small_cfg(0)), ValidationError);
}

TEST(Ensemble, ZeroStepLeavesPositions) {
  auto atoms = sample_ensemble(small_cfg(100));
  const auto before = atoms;
  EXPECT_EQ(advance_ballistic(atoms, 0.0, small_cfg(100), 1), 0u);
  for (std::size_t i = 0; i < atoms.size(); ++i) EXPECT_EQ(atoms[i].position, before[i].position);
  EXPECT_THROW(advance_ballistic(atoms, -1e-9, small_cfg(100), 1), ContractViolation);
}

TEST(Ensemble, SingleAtomKinematics) {
  std::vector<Atom> atoms(1);
  atoms[0].velocity = {100.0, 0.0, 0.0};
  advance_ballistic(atoms, 1e-6, small_cfg(1), 1);
  EXPECT_NEAR(atoms[0].position.x, 100e-6, 1e-18);
  EXPECT_EQ(atoms[0].position.y, 0.0);
}

TEST(Ensemble, ManySmallStepsEqualOneLargeStep) {
  EnsembleConfig cfg = small_cfg(10000);
  cfg.cell_length = 1.0;  // no boundary hits over 1 us
  cfg.sample_radius = 0.5;
  cfg.cell_radius = 0.5;
  auto fine = sample_ensemble(cfg);
  for (Atom& a : fine) a.position = 0.5 * a.position;  // keep clear of the walls
  auto coarse = fine;
  for (int k = 0; k < 100; ++k) EXPECT_EQ(advance_ballistic(fine, 10e-9, cfg, 1), 0u);
  advance_ballistic(coarse, 1e-6, cfg, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) worst = std::max(worst, norm(fine[i].position - coarse[i].position));
  EXPECT_LT(worst, 1e-12);
}

TEST(Ensemble, ReplacementIsFreshAndDeterministic) {
  const EnsembleConfig cfg = small_cfg(1);
  Atom escaped;
  escaped.position = {0.0, 0.0, 1.0};
  escaped.pop1 = 0.2;
  escaped.pop2 = 0.8;
  escaped.amp = {0.1, 0.1};
  const Atom a = replace_escaped(escaped, 3, cfg, 11);
  const Atom b = replace_escaped(escaped, 3, cfg, 11);
  EXPECT_EQ(a.amp, std::complex<double>{});
  EXPECT_EQ(a.pop1, 1.0);
  EXPECT_TRUE(inside_cell(a.position, cfg));
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.velocity, b.velocity);
  EXPECT_EQ(a.generation, escaped.generation + 1);
  EXPECT_THROW(replace_escaped(a, 3, cfg, 11), ContractViolation);
}

TEST(Ensemble, ExchangeKeepsCountCoherenceFreeAndStationary) {
  EnsembleConfig cfg = small_cfg(20000);
  cfg.cell_length = 10e-3;
  cfg.sample_radius = 1e-3;
  auto atoms = sample_ensemble(cfg);
  for (Atom& a : atoms) a.amp = {0.01, 0.0};
  const double sigma2 = thermal_velocity_sigma(cfg.species, cfg.temperature) *
                        thermal_velocity_sigma(cfg.species, cfg.temperature);
  // One radial transit is about 2 mm / 150 m/s = 13 us; run about 25 of them.
  // Exits are detected at step ends, which over-weights fast atoms by roughly
  // dt / transit, so the step is kept well below the transit time.
  const double dt = 0.2e-6;
  for (int k = 0; k < 1600; ++k) advance_ballistic(atoms, dt, cfg, 5);
  ASSERT_EQ(atoms.size(), cfg.n_atoms);

  std::array<double, 3> var{};
  std::array<int, 8> octant{};
  for (const Atom& a : atoms) {
    if (a.generation > 0) {
      ASSERT_EQ(a.amp, std::complex<double>{});
    }
    var[0] += a.velocity.x * a.velocity.x;
    var[1] += a.velocity.y * a.velocity.y;
    var[2] += a.velocity.z * a.velocity.z;
    const int o = (a.position.x > 0) + 2 * (a.position.y > 0) + 4 * (a.position.z > 0);
    ++octant[o];
  }
  for (double v : var) EXPECT_NEAR(v / atoms.size(), sigma2, 0.05 * sigma2);
  const double expected = atoms.size() / 8.0;
  for (int c : octant) EXPECT_NEAR(c, expected, 3.0 * std::sqrt(expected));
}

TEST(Ensemble, BeamWeightDefinition) {
  const BeamGeometry beam = make_beam(240e-6);
  EXPECT_DOUBLE_EQ(beam_weight({0.0, 0.0, 0.02}, beam), 1.0);
  EXPECT_NEAR(beam_weight({240e-6, 0.0, 0.0}, beam), 0.1353352832366127, 1e-15);
  const BeamGeometry assist = make_beam(190e-6, {1e-3, 0.0, 0.0}, 4e-3);
  EXPECT_LT(beam_weight({0.0, 0.0, 0.0}, assist), 1e-24);
}

TEST(Ensemble, TruncatedWeightAgreesInsideCutoff) {
  const BeamGeometry beam = make_beam(300e-6, {1e-4, 0.0, 0.0}, 2e-3);
  for (double r = 0.0; r < 3e-3; r += 1e-5) {
    const Vec3 p{r, 0.5 * r, 0.01};
    const double full = beam_weight(p, beam);
    const double cut = truncated_beam_weight(p, beam);
    if (full > 1e-17) {
      ASSERT_NEAR(cut, full, 1e-15 * full + 1e-300);
    } else {
      ASSERT_LE(cut, full * (1.0 + 1e-12));
    }
  }
}
