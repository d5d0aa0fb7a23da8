#pragma once

#include <complex>
#include <span>
#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/vec3.hpp"

namespace spinregen {

/// Optical and spin-wave wave vectors, rad/m.
struct WaveVectors {
  Vec3 k_signal;
  Vec3 k_control;
  Vec3 k_assist;
  Vec3 delta_k;  // k_signal - k_control
};

/// Signal/control/assisted wave vectors for the given beam directions. The
/// control is one hyperfine splitting below the signal frequency, so
/// |delta_k| = omega_hf / c for co-propagating write beams.
WaveVectors make_wave_vectors(const SpeciesConstants& species, const BeamGeometry& signal,
                              const BeamGeometry& control, const BeamGeometry& assist);

/// Spontaneous-Raman photon scattered from the assisted light along `direction`:
/// it is one hyperfine splitting red of the assisted photon.
Vec3 raman_scattered_wavevector(const SpeciesConstants& species, const Vec3& direction);

/// 2 pi / |delta_k| = c / f_hf.
double spinwave_wavelength(const SpeciesConstants& species);

/// Collection/read mode of the signal-control overlap. Its beam weight equals
/// the product of the two field envelopes, sqrt(w_signal w_control).
BeamGeometry matched_mode(const BeamGeometry& signal, const BeamGeometry& control);

/// Collective bookkeeping carried alongside the per-atom amplitudes.
struct SpinWaveState {
  std::complex<double> collective_amp{0.0, 0.0};  // projection on the gain mode
  std::complex<double> partner_amp{0.0, 0.0};     // conjugate (scattered-light) mode mean field
  double n_excitations = 0.0;                     // sum_j |amp_j|^2, units of input photons
  double noise_squeezing = 0.0;                   // accumulated kappa_eff * t of the vacuum-seeded channel
  double noise_excitations = 0.0;                 // sinh^2(noise_squeezing)
};

struct WriteResult {
  double leaked_fraction = 0.0;
  double stored_excitations = 0.0;
};

/// Maps an input pulse (1 unit of excitation) onto the atoms in `mode`:
/// amp_j = sqrt(eta) u_j exp(i dk.r_j) / sqrt(sum u^2), so that the stored
/// excitation number and the immediate retrieval both equal eta. Populations
/// are moved to |2> as needed to keep |amp|^2 <= pop1 pop2.
/// Throws DegenerateGeometryError if no atom has mode weight above 1e-6.
WriteResult imprint_write(std::span<Atom> atoms, const WaveVectors& vectors, const BeamGeometry& mode,
                          double write_efficiency);

/// Frozen-position representation of motional dephasing: multiplies each
/// amplitude by exp(-i dk.v dt). Equivalent, for the phase factor, to moving
/// the atom by v dt and projecting at its new position.
void dephase_tick(std::span<Atom> atoms, const WaveVectors& vectors, double dt);

/// Normalised projection of the stored amplitudes onto the read mode:
/// sum_j u_j amp_j exp(-i dk.r_j) / sqrt(sum_j u_j^2).
std::complex<double> mode_projection(std::span<const Atom> atoms, const WaveVectors& vectors,
                                     const BeamGeometry& read_mode);

/// |mode_projection|^2, in units of the input pulse.
double retrieval_efficiency(std::span<const Atom> atoms, const WaveVectors& vectors,
                            const BeamGeometry& read_mode);

/// (1/N) sum_j exp(i q.r_j).
std::complex<double> interference_sum(std::span<const Vec3> positions, const Vec3& q);

/// |(k_A - k_RA) - (k_S - k_C)|.
double momentum_mismatch(const WaveVectors& vectors, const Vec3& k_raman);

/// Sum of |amp_j|^2.
double stored_excitations(std::span<const Atom> atoms);

/// Moves population |1> -> |2> where needed so that |amp|^2 <= pop1 pop2.
void enforce_coherence_bound(Atom& atom);

}  // namespace spinregen
