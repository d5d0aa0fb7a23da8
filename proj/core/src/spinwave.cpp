#include "spinregen/spinwave.hpp"

#include <cmath>

#include "spinregen/constants.hpp"
#include "spinregen/error.hpp"

namespace spinregen {

namespace {

std::complex<double> unit_phase(double phase) { return {std::cos(phase), std::sin(phase)}; }

constexpr double kOverlapThreshold = 1e-6;

}  // namespace

WaveVectors make_wave_vectors(const SpeciesConstants& species, const BeamGeometry& signal,
                              const BeamGeometry& control, const BeamGeometry& assist) {
  const double k_s = phys::kTwoPi / species.signal_wavelength;
  const double k_hf = phys::kTwoPi * species.hyperfine_splitting_freq / phys::kSpeedOfLight;
  const double k_a = phys::kTwoPi / species.assist_wavelength;
  WaveVectors v;
  v.k_signal = k_s * signal.axis;
  v.k_control = (k_s - k_hf) * control.axis;
  v.k_assist = k_a * assist.axis;
  v.delta_k = v.k_signal - v.k_control;
  return v;
}

Vec3 raman_scattered_wavevector(const SpeciesConstants& species, const Vec3& direction) {
  const double k_a = phys::kTwoPi / species.assist_wavelength;
  const double k_hf = phys::kTwoPi * species.hyperfine_splitting_freq / phys::kSpeedOfLight;
  return (k_a - k_hf) * normalized(direction);
}

double spinwave_wavelength(const SpeciesConstants& species) {
  if (!(species.hyperfine_splitting_freq > 0.0)) {
    throw ValidationError("hyperfine_splitting_freq must be positive");
  }
  return phys::kSpeedOfLight / species.hyperfine_splitting_freq;
}

BeamGeometry matched_mode(const BeamGeometry& signal, const BeamGeometry& control) {
  // exp(-r^2/ws^2) exp(-r^2/wc^2) == exp(-2 r^2 / w^2)
  const double inv = 0.5 * (1.0 / (signal.waist * signal.waist) + 1.0 / (control.waist * control.waist));
  BeamGeometry mode = signal;
  mode.waist = 1.0 / std::sqrt(inv);
  return mode;
}

void enforce_coherence_bound(Atom& atom) {
  const double c2 = std::norm(atom.amp);
  if (c2 <= atom.pop1 * atom.pop2) return;
  // Smallest |2> population p with p (1 - p) >= |amp|^2.
  const double disc = std::max(0.0, 1.0 - 4.0 * c2);
  const double p2 = 0.5 * (1.0 - std::sqrt(disc));
  if (p2 > atom.pop2) {
    atom.pop2 = p2;
    atom.pop1 = 1.0 - p2;
  }
}

WriteResult imprint_write(std::span<Atom> atoms, const WaveVectors& vectors, const BeamGeometry& mode,
                          double write_efficiency) {
  if (!(write_efficiency >= 0.0 && write_efficiency <= 1.0)) {
    throw ValidationError("write_efficiency must lie in [0, 1]");
  }
  double norm2 = 0.0;
  bool any = false;
  for (const Atom& a : atoms) {
    const double u = beam_weight(a.position, mode);
    norm2 += u * u;
    any = any || u > kOverlapThreshold;
  }
  if (!any) throw DegenerateGeometryError("write beams overlap no atoms (all mode weights <= 1e-6)");

  WriteResult result{1.0 - write_efficiency, 0.0};
  if (write_efficiency == 0.0) return result;

  const double scale = std::sqrt(write_efficiency / norm2);
  for (Atom& a : atoms) {
    const double u = beam_weight(a.position, mode);
    if (u == 0.0) continue;
    a.amp += scale * u * unit_phase(dot(vectors.delta_k, a.position));
    enforce_coherence_bound(a);
  }
  result.stored_excitations = stored_excitations(atoms);
  return result;
}

void dephase_tick(std::span<Atom> atoms, const WaveVectors& vectors, double dt) {
  if (dt == 0.0) return;
  for (Atom& a : atoms) a.amp *= unit_phase(-dot(vectors.delta_k, a.velocity) * dt);
}

std::complex<double> mode_projection(std::span<const Atom> atoms, const WaveVectors& vectors,
                                     const BeamGeometry& read_mode) {
  std::complex<double> sum{0.0, 0.0};
  double norm2 = 0.0;
  for (const Atom& a : atoms) {
    const double u = beam_weight(a.position, read_mode);
    norm2 += u * u;
    if (a.amp == std::complex<double>{} || u == 0.0) continue;
    sum += u * a.amp * unit_phase(-dot(vectors.delta_k, a.position));
  }
  if (norm2 == 0.0) return {0.0, 0.0};
  return sum / std::sqrt(norm2);
}

double retrieval_efficiency(std::span<const Atom> atoms, const WaveVectors& vectors,
                            const BeamGeometry& read_mode) {
  return std::norm(mode_projection(atoms, vectors, read_mode));
}

std::complex<double> interference_sum(std::span<const Vec3> positions, const Vec3& q) {
  if (positions.empty()) throw ContractViolation("interference_sum needs at least one position");
  std::complex<double> sum{0.0, 0.0};
  for (const Vec3& r : positions) sum += unit_phase(dot(q, r));
  return sum / static_cast<double>(positions.size());
}

double momentum_mismatch(const WaveVectors& vectors, const Vec3& k_raman) {
  return norm((vectors.k_assist - k_raman) - vectors.delta_k);
}

double stored_excitations(std::span<const Atom> atoms) {
  double total = 0.0;
  for (const Atom& a : atoms) total += std::norm(a.amp);
  return total;
}

}  // namespace spinregen
