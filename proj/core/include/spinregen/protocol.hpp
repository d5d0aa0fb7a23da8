#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/fitting.hpp"
#include "spinregen/regeneration.hpp"
#include "spinregen/spinwave.hpp"

namespace spinregen {

enum class PulseKind { pump, write, read, assist_on, assist_off, probe };

std::string_view to_string(PulseKind kind);
std::optional<PulseKind> parse_pulse_kind(std::string_view name);

struct PulseEvent {
  PulseKind kind = PulseKind::read;
  double start = 0.0;          // s
  double duration = 0.0;       // s; FWHM for Gaussian pulses, 0 for switches
  double energy = 0.0;         // J for control pulses, W for cw light
  double detuning = 0.0;       // Hz
  double signal_energy = 0.0;  // J, write events only; 0 means no input signal

  double centre() const { return start + 0.5 * duration; }
};

struct PulseSequence {
  std::vector<PulseEvent> events;
  std::size_t trial_count = 1;
  double dt = 10e-9;  // s
};

/// Chronological order, positive durations for pulses, no overlap between
/// pulses of the same kind, pump off at least 100 ns before the write pulse,
/// assist switches alternating on/off.
void validate(const PulseSequence& seq);

/// How a read pulse depletes the stored wave.
enum class ReadDepletion {
  projective,        // removes the read-mode component only
  control_weighted,  // local depletion set by the control intensity at each atom
};

std::string_view to_string(ReadDepletion mode);
std::optional<ReadDepletion> parse_read_depletion(std::string_view name);

struct OpticalSetup {
  BeamGeometry signal;
  BeamGeometry control;
  BeamGeometry assist_laser;
  BeamGeometry pump;
  BeamGeometry probe;
};

struct MemoryModel {
  double write_efficiency = 0.9;
  double dark_lifetime = 18e-6;  // s; 0 disables dark relaxation
  double equilibrium_pop1 = 7.0 / 16.0;
  double optical_depth = 2.0;  // probe absorption map
  double read_fwhm = 70e-9;    // s
  ReadDepletion read_depletion = ReadDepletion::control_weighted;
  // Pulse area of a read on the control axis: a full read scales |amp|^2 by
  // exp(-read_strength * w_C).
  double read_strength = 3.0;
  // Share of depol_rate felt by the untracked reservoir of the cell.
  double reservoir_illumination = 1.0;
  double detection_efficiency = 0.07;
  double fwm_noise_photons = 0.8;
};

/// Everything a run needs besides the pulse sequence.
struct Experiment {
  EnsembleConfig ensemble;
  OpticalSetup beams;
  GainModel gain;
  MemoryModel memory;
  double dt = 10e-9;     // s, main integrator step
  double tp_dt = 50e-9;  // s, step for population-only transmission runs

  WaveVectors wave_vectors() const;
  BeamGeometry read_mode() const;
  /// Noise spin-wave wave vector relative to the read pattern:
  /// (k_A - k_RA) - dk with k_RA scattered along the signal axis.
  Vec3 noise_mismatch() const;
};

/// Gain coefficient from calibrate_kappa(0.98) at the defaults below, 1/s.
inline constexpr double kDefaultKappa = 3.125e6;

/// Defaults of the Cs experiment: 72 C cell, 240/300/190 um waists, assisted
/// laser 1 mm off axis at 4 mrad.
Experiment reference_experiment();

/// Pulse-train timing: pump off 100 ns before W (centre 450 ns), R1 at 1170 ns,
/// R2 at 1500 ns, 330 ns assist window opening when W ends.
PulseSequence fig2_sequence(bool with_assist, bool with_signal, double dt = 10e-9);

/// Input photons in a pulse of `energy` at `wavelength`.
double photons_in_pulse(double energy, double wavelength);

struct ReadOutcome {
  double centre = 0.0;
  double efficiency = 0.0;         // retrieved energy / input signal energy
  double efficiency_stored = 0.0;  // retrieved energy / stored excitation
  double noise = 0.0;              // noise excitations retrieved into the signal mode
};

struct TraceResult {
  std::vector<double> time;             // s
  std::vector<double> signal_out;       // retrieved signal, input energies per second
  std::vector<double> leak_out;         // leaked signal, input energies per second
  std::vector<double> mode_excitation;  // |read-mode projection|^2
  std::vector<double> stored;           // sum |amp|^2
  std::vector<double> pop1;             // read-mode weighted
  std::vector<double> pop2;
  std::vector<double> transmission;     // probe transmission
  std::vector<double> noise;            // noise-channel excitations

  std::vector<ReadOutcome> reads;
  double write_efficiency = 0.0;
  double leaked_fraction = 0.0;
  std::vector<double> probe_times;
  std::vector<double> probe_efficiency;
  std::size_t replaced_atoms = 0;

  // Excitation audit after the write, in input units. With the leak, the
  // retrieved signal and the final store these close the balance
  // leak + retrieved + stored + losses = 1 + gain_added.
  double transit_loss = 0.0;  // carried out of the tracked volume
  double read_loss = 0.0;     // removed by reads but not emitted into the signal mode
  double quench_loss = 0.0;   // removed with |1> population by the assisted light
  double gain_added = 0.0;
};

struct RunOptions {
  /// Non-destructive retrieval-efficiency samples (read-mode overlap).
  std::vector<double> probe_times;
  std::size_t trace_stride = 1;
  double t_end = std::numeric_limits<double>::quiet_NaN();  // default: last event + read tail
  /// Ends the run after the first probe sample below this value.
  std::optional<double> stop_below;
};

/// Runs the pulse sequence and averages `trial_count` Monte-Carlo trials in
/// index order; trial i uses derive_seed(ensemble.rng_seed, i).
TraceResult run_sequence(const PulseSequence& seq, const Experiment& exp, const RunOptions& options = {});

struct Fig2Result {
  double s_leak = 0.0;
  double s_out_noA = 0.0;
  double r2_noA = 0.0;
  double s_out_A = 0.0;
  double r2_A = 0.0;
  double s_out_A_noSin = 0.0;
  double r2_A_noSin = 0.0;
  double shape_residual_noA = 0.0;
  double shape_residual_A = 0.0;
  TraceResult no_assist;
  TraceResult assist;
  TraceResult assist_no_signal;
};

Fig2Result fig2_experiment(const Experiment& exp);

struct LifetimeCurve {
  std::vector<double> delay;       // s after the write pulse centre
  std::vector<double> efficiency;  // retrieval efficiency, input units
  double reference = 0.0;          // efficiency at zero delay
  std::optional<double> one_over_e;
};

/// Retrieval efficiency against storage time, assisted light on for the
/// whole storage interval when `assist` is set. The read does not act back on
/// the evolution before it, so all delays are sampled from one evolution.
/// With `stop_after_crossing`, the evolution ends at the first sample below
/// the 1/e level.
LifetimeCurve lifetime_scan(std::span<const double> delays, bool assist, const Experiment& exp,
                            bool stop_after_crossing = false);

/// tp_eq + (tp_0 - tp_eq) exp(-t / lifetime).
double franzen_tp(double t, double lifetime, double tp_initial, double tp_equilibrium);

struct TpCurve {
  std::vector<double> time;          // s after pump shut-off
  std::vector<double> transmission;  // probe transmission
  std::vector<double> pop1;          // probe-weighted
  ExponentialFit absorbance_fit;     // fit of -ln(TP)/OD
  double fitted_lifetime = 0.0;
  double tp_initial = 0.0;
  double tp_equilibrium = 0.0;
};

/// Relaxation in the dark after the pump is shut off at t = 0, with the
/// assisted light switched on at t = 0 when `assist` is set.
TpCurve tp_experiment(bool assist, const Experiment& exp, double t_max = 90e-6, std::size_t samples = 181);

/// Population relaxation toward `equilibrium_pop1` with time constant
/// `lifetime`; coherences are not touched.
void relax_populations(std::span<Atom> atoms, double dt, double lifetime, double equilibrium_pop1);

}  // namespace spinregen
