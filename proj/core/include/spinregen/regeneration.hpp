#pragma once

#include <complex>
#include <span>
#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/spinwave.hpp"

namespace spinregen {

/// Assisted-light parameters. `assist_beam` is the region of the spin wave
/// illuminated by scattered assisted photons, not the assisted laser itself.
struct GainModel {
  double kappa = 0.0;       // 1/s
  bool assist_on = false;
  double depol_rate = 0.0;  // 1/s, |1> -> |2> pumping on the beam axis
  double partner_decay = 0.0;  // 1/s, damping of the partner mean field
  BeamGeometry assist_beam;
};

void validate(const GainModel& model);

struct GainMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Largest kappa * dt accepted by apply_gain_tick.
inline constexpr double kMaxGainStep = 0.05;

/// n0 cosh^2(kappa t) + sinh^2(kappa t).
double mean_excitation(double n0, double kappa, double t);

/// sinh^2(2 kappa t) (1 + n0) / 4, for a number-state input of n0 excitations.
double excitation_variance(double n0, double kappa, double t);

/// Reusable buffers for apply_gain_tick.
struct GainScratch {
  std::vector<std::size_t> index;
  std::vector<std::complex<double>> mode;
};

/// One step of two-mode parametric gain on the phase-matched collective mode.
///
/// The gain mode is g_j = w_A(r_j) pop1_j exp(i dk.r_j); its projection A and
/// the partner mean field B evolve by the exact exponential of
/// [[0, k], [k, -partner_decay]] with k = kappa * (w_A-weighted mean pop1);
/// without partner decay this is the two-mode transformation cosh/sinh. The change in A is written
/// back along g, so atoms without coherence pick up correctly phased
/// amplitude. The vacuum-seeded part goes to state.noise_excitations only.
/// Throws StepSizeError if kappa * dt > kMaxGainStep.
void apply_gain_tick(std::span<Atom> atoms, SpinWaveState& state, const GainModel& model,
                     const WaveVectors& vectors, double dt, GainScratch* scratch = nullptr);

/// Optical pumping |1> -> |2> by the assisted light at depol_rate * w_A.
/// Coherence follows the |1> amplitude: amp *= exp(-R w dt / 2).
void depolarize_tick(std::span<Atom> atoms, const GainModel& model, double dt);

/// Intrinsic noise photons from raw detected counts: raw / eta.
double noise_budget(double raw_noise_counts, double detection_efficiency);

}  // namespace spinregen
