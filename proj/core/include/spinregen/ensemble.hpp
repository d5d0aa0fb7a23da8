#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spinregen/vec3.hpp"

namespace spinregen {

struct SpeciesConstants {
  double atomic_mass = 0.0;              // kg
  double hyperfine_splitting_freq = 0.0;  // Hz (omega_hf / 2 pi)
  double signal_wavelength = 0.0;         // m
  double assist_wavelength = 0.0;         // m
};

/// 133Cs with D2 signal and D1 assisted light.
SpeciesConstants cesium133();

/// Cylindrical vapour cell centred on the origin, axis along z.
///
/// Atoms are only tracked inside `sample_radius` (capped at `cell_radius`).
/// The surface of that cylinder exchanges atoms with the untracked remainder
/// of the cell, which acts as a thermal reservoir of fresh atoms.
struct EnsembleConfig {
  std::size_t n_atoms = 200000;
  double temperature = 345.15;  // K
  double cell_length = 75e-3;   // m
  double cell_radius = 10e-3;   // m
  double sample_radius = 1.5e-3;  // m
  SpeciesConstants species = cesium133();
  std::uint64_t rng_seed = 1;

  /// Radius of the tracked cylinder.
  double tracked_radius() const { return sample_radius < cell_radius ? sample_radius : cell_radius; }
};

/// Throws ValidationError naming the first offending field.
void validate(const SpeciesConstants& species);
void validate(const EnsembleConfig& cfg);

struct Atom {
  Vec3 position;  // m
  Vec3 velocity;  // m/s
  double pop1 = 1.0;
  double pop2 = 0.0;
  std::complex<double> amp{0.0, 0.0};
  // Number of times this slot was refilled by boundary exchange; keys the
  // random stream of the next replacement.
  std::uint32_t generation = 0;
};

/// Gaussian beam: passes through `transverse_offset` along unit `axis`.
struct BeamGeometry {
  Vec3 axis{0.0, 0.0, 1.0};
  double waist = 0.0;  // 1/e^2 intensity radius, m
  Vec3 transverse_offset{};
  double tilt_angle = 0.0;  // rad, relative to the signal axis (+z)
};

/// Beam tilted by `tilt` in the x-z plane and displaced by `offset`.
BeamGeometry make_beam(double waist, Vec3 offset = {}, double tilt = 0.0);

void validate(const BeamGeometry& beam);

/// exp(-2 r^2 / w^2) with r the distance from the beam axis.
double beam_weight(const Vec3& position, const BeamGeometry& beam);

/// beam_weight set to exactly 0 below exp(-40), about 4.5 waists out. The
/// hot per-step loops use it to skip the exponential for distant atoms.
double truncated_beam_weight(const Vec3& position, const BeamGeometry& beam);

/// Mean speed sqrt(8 k T / (pi m)).
double mean_thermal_speed(const SpeciesConstants& species, double temperature);

/// Per-component velocity standard deviation sqrt(k T / m).
double thermal_velocity_sigma(const SpeciesConstants& species, double temperature);

bool inside_cell(const Vec3& position, const EnsembleConfig& cfg);

/// Uniform positions in the tracked cylinder, Maxwell-Boltzmann velocities,
/// everything in |1>. Deterministic in cfg.rng_seed.
std::vector<Atom> sample_ensemble(const EnsembleConfig& cfg);

/// Thermalizing-wall replacement for an atom that left the tracked volume.
/// The new atom sits just inside a uniformly chosen point of the boundary
/// surface with a cosine-law (flux-weighted) inward velocity, zero coherence
/// and `fresh_pop1` in |1>. `slot` is the index of the atom in its ensemble;
/// together with the seed and the atom's generation it fixes the draw.
Atom replace_escaped(const Atom& atom, std::size_t slot, const EnsembleConfig& cfg,
                     std::uint64_t seed, double fresh_pop1 = 1.0);

/// position += velocity * dt, then boundary exchange. Returns the number of
/// replaced atoms.
std::size_t advance_ballistic(std::span<Atom> atoms, double dt, const EnsembleConfig& cfg,
                              std::uint64_t seed, double fresh_pop1 = 1.0);

}  // namespace spinregen
