#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/error.hpp"
#include "spinregen/gain_oracle.hpp"
#include "spinregen/regeneration.hpp"
#include "spinregen/spinwave.hpp"

using namespace spinregen;

namespace {

WaveVectors vectors() {
  return make_wave_vectors(cesium133(), make_beam(240e-6), make_beam(300e-6), make_beam(190e-6, {1e-3, 0, 0}, 4e-3));
}

// Frozen gas (T -> 0) with a weak imprint in the assist mode, so pop1 stays ~1.
std::vector<Atom> frozen_imprint(std::size_t n, const BeamGeometry& mode, double efficiency) {
  EnsembleConfig cfg;
  cfg.n_atoms = n;
  cfg.temperature = 1e-9;
  cfg.sample_radius = 0.8e-3;
  cfg.rng_seed = 99;
  auto atoms = sample_ensemble(cfg);
  imprint_write(atoms, vectors(), mode, efficiency);
  return atoms;
}

GainModel gain_on(double kappa, const BeamGeometry& beam) {
  GainModel m;
  m.kappa = kappa;
  m.assist_on = true;
  m.assist_beam = beam;
  return m;
}

double collective_after(std::vector<Atom> atoms, const GainModel& model, double dt, int steps) {
  SpinWaveState state;
  const WaveVectors v = vectors();
  for (int i = 0; i < steps; ++i) apply_gain_tick(atoms, state, model, v, dt);
  return std::norm(state.collective_amp);
}

}  // namespace

TEST(GainLaw, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(mean_excitation(5.0, 0.0, 3.0), 5.0);
  EXPECT_NEAR(mean_excitation(0.0, 1.0, 1.0), 1.3811, 5e-5);
  EXPECT_NEAR(mean_excitation(1.0, 1.0, 0.5), std::cosh(1.0), 1e-14);
  EXPECT_NEAR(mean_excitation(1.0, 1.0, 0.5), 1.5431, 5e-5);
  EXPECT_DOUBLE_EQ(excitation_variance(4.0, 2.0, 0.0), 0.0);
  EXPECT_NEAR(excitation_variance(0.0, 1.0, 1.0), 3.2885, 5e-5);
  // sinh^2(0.6) (1 + 3) / 4 = 4 cosh^2(0.3) sinh^2(0.3)
  const double c = std::cosh(0.3), s = std::sinh(0.3);
  EXPECT_NEAR(excitation_variance(3.0, 1.0, 0.3), 4.0 * c * c * s * s, 1e-14);
  EXPECT_NEAR(excitation_variance(3.0, 1.0, 0.3), 0.4053, 5e-5);
  EXPECT_THROW(mean_excitation(1.0, 1.0, -1.0), ValidationError);
}

TEST(GainLaw, MeanNeverBelowInput) {
  for (int n0 = 0; n0 <= 5; ++n0) {
    EXPECT_EQ(mean_excitation(n0, 0.0, 1.0), n0);
    EXPECT_EQ(mean_excitation(n0, 1.0, 0.0), n0);
    for (double kt = 0.05; kt <= 2.0; kt += 0.05) EXPECT_GT(mean_excitation(n0, 1.0, kt), n0);
  }
}

TEST(GainOracle, VacuumAndSpecPoints) {
  const OracleResult zero = two_mode_gain_oracle(0, 0.0, 60);
  EXPECT_EQ(zero.mean, 0.0);
  EXPECT_EQ(zero.variance, 0.0);
  const OracleResult one = two_mode_gain_oracle(0, 1.0, 60);
  EXPECT_NEAR(one.mean, std::pow(std::sinh(1.0), 2), 1e-9);
  EXPECT_NEAR(one.variance, std::pow(std::sinh(2.0), 2) / 4.0, 1e-8);
  const OracleResult two = converged_gain_oracle(2, 0.7);
  EXPECT_NEAR(two.mean, mean_excitation(2, 1.0, 0.7), 1e-8);
  EXPECT_NEAR(two.variance, excitation_variance(2, 1.0, 0.7), 1e-8);
}

TEST(GainOracle, GridAgreesWithClosedForms) {
  double worst = 0.0;
  for (int n0 = 0; n0 <= 5; ++n0) {
    for (int i = 0; i <= 8; ++i) {
      const double kt = 0.25 * i;
      const OracleResult r = converged_gain_oracle(n0, kt);
      worst = std::max({worst, std::abs(r.mean - mean_excitation(n0, 1.0, kt)),
                        std::abs(r.variance - excitation_variance(n0, 1.0, kt))});
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(GainOracle, RejectsBadInput) {
  EXPECT_THROW(two_mode_gain_oracle(-1, 0.5, 100), ValidationError);
  EXPECT_THROW(two_mode_gain_oracle(0, 2.5, 100), ValidationError);
  EXPECT_THROW(two_mode_gain_oracle(0, 1.0, 2), ValidationError);
}

TEST(GainTick, ZeroKappaIsIdentity) {
  const BeamGeometry mode = make_beam(240e-6);
  auto atoms = frozen_imprint(5000, mode, 0.9);
  const auto before = atoms;
  SpinWaveState state;
  apply_gain_tick(atoms, state, gain_on(0.0, mode), vectors(), 10e-9);
  for (std::size_t i = 0; i < atoms.size(); ++i) ASSERT_EQ(atoms[i].amp, before[i].amp);
  EXPECT_EQ(state.noise_excitations, 0.0);
  EXPECT_EQ(state.collective_amp, std::complex<double>{});
}

TEST(GainTick, StaticEnsembleFollowsCoshSquared) {
  // Imprint directly in the gain mode so the whole store is in the collective amplitude.
  const BeamGeometry mode = make_beam(240e-6);
  const auto atoms = frozen_imprint(20000, mode, 1e-3);
  const double n0 = collective_after(atoms, gain_on(1e6, mode), 1e-12, 1);
  const double kappa = 2e6, dt = 5e-9;
  const int steps = 100;  // kappa t = 1
  const double n = collective_after(atoms, gain_on(kappa, mode), dt, steps);
  const double c = std::cosh(kappa * dt * steps);
  EXPECT_NEAR(n, n0 * c * c, 1e-3 * n0 * c * c);
}

TEST(GainTick, CompositionConvergesAtFirstOrder) {
  const BeamGeometry mode = make_beam(240e-6);
  const auto atoms = frozen_imprint(20000, mode, 0.05);
  const GainModel model = gain_on(5e5, mode);
  const double total = 400e-9;
  const double reference = collective_after(atoms, model, total / 256, 256);
  const double e1 = std::abs(collective_after(atoms, model, total / 4, 4) - reference);
  const double e2 = std::abs(collective_after(atoms, model, total / 8, 8) - reference);
  const double e40 = std::abs(collective_after(atoms, model, total / 40, 40) - reference);
  // Each step is an exact exponential, but the mode weights use pop1 from the
  // start of the step, so the splitting is first order in dt.
  EXPECT_GE(std::log2(e1 / e2), 0.9);
  EXPECT_LT(e40, 1e-3 * reference);
}

TEST(GainTick, FreshAtomPicksUpPhaseOfWave) {
  const BeamGeometry mode = make_beam(240e-6);
  auto atoms = frozen_imprint(20000, mode, 0.5);
  Atom fresh;
  fresh.position = {30e-6, -20e-6, 0.0123};
  atoms.push_back(fresh);
  SpinWaveState state;
  const WaveVectors v = vectors();
  apply_gain_tick(atoms, state, gain_on(2e6, mode), v, 10e-9);
  const std::complex<double> amp = atoms.back().amp;
  ASSERT_GT(std::abs(amp), 0.0);
  const double expected = dot(v.delta_k, fresh.position) + std::arg(state.collective_amp);
  EXPECT_LT(std::abs(std::remainder(std::arg(amp) - expected, 2.0 * std::numbers::pi)), 1e-6);
}

TEST(GainTick, PopulationStaysNormalised) {
  const BeamGeometry mode = make_beam(240e-6);
  auto atoms = frozen_imprint(5000, mode, 0.9);
  SpinWaveState state;
  GainModel model = gain_on(4e6, mode);
  model.depol_rate = 1e6;
  for (int i = 0; i < 50; ++i) {
    apply_gain_tick(atoms, state, model, vectors(), 10e-9);
    depolarize_tick(atoms, model, 10e-9);
  }
  for (const Atom& a : atoms) {
    ASSERT_NEAR(a.pop1 + a.pop2, 1.0, 1e-12);
    ASSERT_LE(std::norm(a.amp), a.pop1 * a.pop2 * (1.0 + 1e-12) + 1e-18);
  }
}

TEST(GainTick, CoarseStepRejected) {
  auto atoms = frozen_imprint(100, make_beam(240e-6), 0.9);
  SpinWaveState state;
  EXPECT_THROW(apply_gain_tick(atoms, state, gain_on(1e7, make_beam(240e-6)), vectors(), 10e-9), StepSizeError);
}

TEST(GainTick, NoiseChannelIsSinhSquared) {
  const BeamGeometry mode = make_beam(240e-6);
  auto atoms = frozen_imprint(5000, mode, 1e-4);
  SpinWaveState state;
  for (int i = 0; i < 100; ++i) apply_gain_tick(atoms, state, gain_on(2e6, mode), vectors(), 5e-9);
  EXPECT_NEAR(state.noise_excitations, std::pow(std::sinh(state.noise_squeezing), 2), 1e-12);
  EXPECT_NEAR(state.noise_squeezing, 1.0, 1e-3);
}

TEST(Depolarize, OnAxisExponential) {
  std::vector<Atom> atoms(1);
  GainModel m = gain_on(0.0, make_beam(240e-6));
  m.depol_rate = 1e5;
  depolarize_tick(atoms, m, 10e-6);
  EXPECT_NEAR(atoms[0].pop1, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(atoms[0].pop1, 0.368, 5e-4);
  m.depol_rate = 0.0;
  const Atom before = atoms[0];
  depolarize_tick(atoms, m, 10e-6);
  EXPECT_EQ(atoms[0].pop1, before.pop1);
}

TEST(NoiseBudget, ReferenceNumbers) {
  EXPECT_NEAR(noise_budget(0.012, 0.07), 0.171, 5e-4);
  EXPECT_EQ(noise_budget(0.0, 0.3), 0.0);
  // Forward application: 0.8 intrinsic FWM photons seen through eta = 0.07.
  EXPECT_NEAR(0.8 * 0.07, 0.056, 1e-12);
  EXPECT_NEAR(noise_budget(0.056, 0.07), 0.8, 1e-12);
  EXPECT_THROW(noise_budget(0.1, 0.0), ValidationError);
  EXPECT_THROW(noise_budget(-0.1, 0.5), ValidationError);
}
