#include "spinregen/ensemble.hpp"

#include <cmath>
#include <string>

#include "spinregen/constants.hpp"
#include "spinregen/error.hpp"
#include "spinregen/random.hpp"

namespace spinregen {

namespace {

// Replacement atoms start this far inside the boundary so that they are not
// immediately flagged as escaped again.
constexpr double kWallInset = 1e-9;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be positive and finite (got " +
                          std::to_string(value) + ")");
  }
}

}  // namespace

SpeciesConstants cesium133() {
  return {phys::kCesiumMass, phys::kCesiumHyperfineHz, phys::kCesiumD2Wavelength,
          phys::kCesiumD1Wavelength};
}

void validate(const SpeciesConstants& species) {
  require_positive(species.atomic_mass, "atomic_mass");
  require_positive(species.hyperfine_splitting_freq, "hyperfine_splitting_freq");
  require_positive(species.signal_wavelength, "signal_wavelength");
  require_positive(species.assist_wavelength, "assist_wavelength");
  if (species.assist_wavelength == species.signal_wavelength) {
    throw ValidationError("assist_wavelength must differ from signal_wavelength");
  }
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.n_atoms == 0) throw ValidationError("n_atoms must be at least 1");
  require_positive(cfg.temperature, "temperature");
  require_positive(cfg.cell_length, "cell_length");
  require_positive(cfg.cell_radius, "cell_radius");
  require_positive(cfg.sample_radius, "sample_radius");
  validate(cfg.species);
}

BeamGeometry make_beam(double waist, Vec3 offset, double tilt) {
  return {Vec3{std::sin(tilt), 0.0, std::cos(tilt)}, waist, offset, tilt};
}

void validate(const BeamGeometry& beam) {
  require_positive(beam.waist, "waist");
  if (std::abs(norm(beam.axis) - 1.0) > 1e-12) throw ValidationError("beam axis must be a unit vector");
}

double beam_weight(const Vec3& position, const BeamGeometry& beam) {
  const Vec3 d = position - beam.transverse_offset;
  const double along = dot(d, beam.axis);
  const double r2 = std::max(0.0, dot(d, d) - along * along);
  return std::exp(-2.0 * r2 / (beam.waist * beam.waist));
}

double truncated_beam_weight(const Vec3& position, const BeamGeometry& beam) {
  const Vec3 d = position - beam.transverse_offset;
  const double along = dot(d, beam.axis);
  const double x = 2.0 * (dot(d, d) - along * along) / (beam.waist * beam.waist);
  return x > 40.0 ? 0.0 : std::exp(-std::max(0.0, x));
}

double mean_thermal_speed(const SpeciesConstants& species, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  return std::sqrt(8.0 * phys::kBoltzmann * temperature / (phys::kPi * species.atomic_mass));
}

double thermal_velocity_sigma(const SpeciesConstants& species, double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  return std::sqrt(phys::kBoltzmann * temperature / species.atomic_mass);
}

bool inside_cell(const Vec3& p, const EnsembleConfig& cfg) {
  const double r = cfg.tracked_radius();
  return p.x * p.x + p.y * p.y <= r * r && std::abs(p.z) <= 0.5 * cfg.cell_length;
}

std::vector<Atom> sample_ensemble(const EnsembleConfig& cfg) {
  validate(cfg);
  const double sigma = thermal_velocity_sigma(cfg.species, cfg.temperature);
  const double radius = cfg.tracked_radius();
  std::vector<Atom> atoms(cfg.n_atoms);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    StreamRng rng(cfg.rng_seed, i);
    Atom& a = atoms[i];
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = phys::kTwoPi * rng.uniform();
    a.position = {r * std::cos(phi), r * std::sin(phi), cfg.cell_length * (rng.uniform() - 0.5)};
    a.velocity = {sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal()};
  }
  return atoms;
}

Atom replace_escaped(const Atom& atom, std::size_t slot, const EnsembleConfig& cfg,
                     std::uint64_t seed, double fresh_pop1) {
  if (inside_cell(atom.position, cfg)) {
    throw ContractViolation("replace_escaped called on an atom inside the cell");
  }
  const double radius = cfg.tracked_radius();
  const double half = 0.5 * cfg.cell_length;
  const double sigma = thermal_velocity_sigma(cfg.species, cfg.temperature);

  // Stream key: slot in the high bits, refill count in the low bits.
  StreamRng rng(mix64(seed ^ 0x5EEDF00DULL), (static_cast<std::uint64_t>(slot) << 24) ^ atom.generation);

  Atom fresh;
  fresh.generation = atom.generation + 1;
  fresh.pop1 = fresh_pop1;
  fresh.pop2 = 1.0 - fresh_pop1;

  const double inward = sigma * std::sqrt(-2.0 * std::log(rng.uniform()));
  const double side_area = phys::kTwoPi * radius * cfg.cell_length;
  const double cap_area = phys::kPi * radius * radius;
  const double pick = rng.uniform() * (side_area + 2.0 * cap_area);

  if (pick < side_area) {
    const double phi = phys::kTwoPi * rng.uniform();
    const Vec3 n_out{std::cos(phi), std::sin(phi), 0.0};
    const Vec3 t1{-n_out.y, n_out.x, 0.0};
    const double rr = radius - kWallInset;
    fresh.position = {rr * n_out.x, rr * n_out.y, cfg.cell_length * (rng.uniform() - 0.5)};
    fresh.velocity = -inward * n_out + sigma * rng.normal() * t1 + Vec3{0.0, 0.0, sigma * rng.normal()};
  } else {
    const double sign = pick < side_area + cap_area ? 1.0 : -1.0;
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = phys::kTwoPi * rng.uniform();
    fresh.position = {r * std::cos(phi), r * std::sin(phi), sign * (half - kWallInset)};
    fresh.velocity = {sigma * rng.normal(), sigma * rng.normal(), -sign * inward};
  }
  return fresh;
}

std::size_t advance_ballistic(std::span<Atom> atoms, double dt, const EnsembleConfig& cfg,
                              std::uint64_t seed, double fresh_pop1) {
  if (dt < 0.0) throw ContractViolation("advance_ballistic requires dt >= 0");
  if (dt == 0.0) return 0;
  std::size_t replaced = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Atom& a = atoms[i];
    a.position += a.velocity * dt;
    if (!inside_cell(a.position, cfg)) {
      a = replace_escaped(a, i, cfg, seed, fresh_pop1);
      ++replaced;
    }
  }
  return replaced;
}

}  // namespace spinregen
