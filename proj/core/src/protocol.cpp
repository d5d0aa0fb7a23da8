#include "spinregen/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "spinregen/constants.hpp"
#include "spinregen/error.hpp"
#include "spinregen/random.hpp"

namespace spinregen {

namespace {

constexpr double kTimeEps = 1e-13;  // s, tolerance when comparing event times to the grid
constexpr double kPumpMinLead = 100e-9;
constexpr double kFwhmToSigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))
constexpr double kReadHalfWindow = 2.0;               // read window half-width, in FWHM

bool is_pulse(PulseKind k) { return k != PulseKind::assist_on && k != PulseKind::assist_off; }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::complex<double> unit_phase(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Cumulative share of a Gaussian read pulse delivered before time x, renormalised
// to the finite window [centre - 2 FWHM, centre + 2 FWHM].
struct ReadWindow {
  double centre = 0.0;
  double sigma = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t index = 0;

  double cdf(double x) const {
    if (x <= lo) return 0.0;
    if (x >= hi) return 1.0;
    const double a = normal_cdf((lo - centre) / sigma);
    const double b = normal_cdf((hi - centre) / sigma);
    return (normal_cdf((x - centre) / sigma) - a) / (b - a);
  }
};

struct ModeSnapshot {
  std::complex<double> projection{0.0, 0.0};
  double norm2 = 0.0;
  double pop1 = 0.0;
  double pop2 = 0.0;
  double probe_pop2 = 0.0;
};

ModeSnapshot snapshot(std::span<const Atom> atoms, const WaveVectors& vectors, const BeamGeometry& mode,
                      const BeamGeometry* probe) {
  ModeSnapshot s;
  double sum_w = 0.0, sum_p = 0.0, sum_pp2 = 0.0;
  for (const Atom& a : atoms) {
    const double u = truncated_beam_weight(a.position, mode);
    s.norm2 += u * u;
    sum_w += u;
    s.pop1 += u * a.pop1;
    s.pop2 += u * a.pop2;
    if (u > 0.0 && a.amp != std::complex<double>{}) {
      s.projection += u * a.amp * unit_phase(-dot(vectors.delta_k, a.position));
    }
    if (probe) {
      const double p = truncated_beam_weight(a.position, *probe);
      sum_p += p;
      sum_pp2 += p * a.pop2;
    }
  }
  if (s.norm2 > 0.0) s.projection /= std::sqrt(s.norm2);
  if (sum_w > 0.0) {
    s.pop1 /= sum_w;
    s.pop2 /= sum_w;
  }
  if (sum_p > 0.0) s.probe_pop2 = sum_pp2 / sum_p;
  return s;
}

double probe_transmission(double pop2, double optical_depth) { return std::exp(-optical_depth * pop2); }

void pump_reset(std::span<Atom> atoms, const BeamGeometry& pump) {
  for (Atom& a : atoms) {
    if (beam_weight(a.position, pump) < 0.5) continue;
    a.pop1 = 1.0;
    a.pop2 = 0.0;
    a.amp = {0.0, 0.0};
  }
}

void validate_experiment(const Experiment& exp) {
  validate(exp.ensemble);
  validate(exp.beams.signal);
  validate(exp.beams.control);
  validate(exp.beams.assist_laser);
  validate(exp.beams.pump);
  validate(exp.beams.probe);
  validate(exp.gain);
  const MemoryModel& m = exp.memory;
  if (!(m.write_efficiency >= 0.0 && m.write_efficiency <= 1.0)) throw ValidationError("write_efficiency must lie in [0, 1]");
  if (!(m.dark_lifetime >= 0.0)) throw ValidationError("dark_lifetime must be >= 0");
  if (!(m.equilibrium_pop1 >= 0.0 && m.equilibrium_pop1 <= 1.0)) throw ValidationError("equilibrium_pop1 must lie in [0, 1]");
  if (!(m.optical_depth > 0.0)) throw ValidationError("optical_depth must be positive");
  if (!(m.read_fwhm > 0.0)) throw ValidationError("read_fwhm must be positive");
  if (!(m.read_strength > 0.0)) throw ValidationError("read_strength must be positive");
  if (!(m.reservoir_illumination >= 0.0 && m.reservoir_illumination <= 1.0)) {
    throw ValidationError("reservoir_illumination must lie in [0, 1]");
  }
  if (!(exp.dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(exp.tp_dt > 0.0)) throw ValidationError("tp_dt must be positive");
}

class TrialRunner {
 public:
  TrialRunner(const PulseSequence& seq, const Experiment& exp, const RunOptions& options, std::uint64_t seed)
      : seq_(seq), exp_(exp), options_(options), seed_(seed), vectors_(exp.wave_vectors()),
        read_mode_(exp.read_mode()), gain_(exp.gain) {
    cfg_ = exp.ensemble;
    cfg_.rng_seed = seed;
    atoms_ = sample_ensemble(cfg_);
  }

  TraceResult run() {
    const double dt = seq_.dt;
    double t0 = seq_.events.empty() ? 0.0 : seq_.events.front().start;
    for (double p : options_.probe_times) t0 = std::min(t0, p);

    std::vector<ReadWindow> windows;
    double t_end = t0;
    for (const PulseEvent& e : seq_.events) {
      t_end = std::max(t_end, e.start + e.duration);
      if (e.kind == PulseKind::read) {
        ReadWindow w;
        w.centre = e.centre();
        w.sigma = kFwhmToSigma * exp_.memory.read_fwhm;
        w.lo = w.centre - kReadHalfWindow * exp_.memory.read_fwhm;
        w.hi = w.centre + kReadHalfWindow * exp_.memory.read_fwhm;
        w.index = windows.size();
        windows.push_back(w);
        t_end = std::max(t_end, w.hi + dt);
      }
    }
    for (double p : options_.probe_times) t_end = std::max(t_end, p);
    if (!std::isnan(options_.t_end)) t_end = options_.t_end;

    const auto n_steps = static_cast<std::size_t>(std::ceil((t_end - t0) / dt - 1e-9));
    result_.reads.resize(windows.size());
    for (const ReadWindow& w : windows) result_.reads[w.index].centre = w.centre;
    result_.probe_times = options_.probe_times;
    result_.probe_efficiency.assign(options_.probe_times.size(), 0.0);

    const Vec3 q_noise = exp_.noise_mismatch();
    std::size_t next_probe = 0;
    bool pumping = false;
    bool assisting = false;
    const double write_eff = exp_.memory.write_efficiency;

    for (std::size_t k = 0; k <= n_steps; ++k) {
      const double t = t0 + static_cast<double>(k) * dt;
      if (k > 0) step(dt, pumping, assisting);

      pumping = false;
      bool assist_now = false;
      for (const PulseEvent& e : seq_.events) {
        if (e.kind == PulseKind::pump && e.start <= t + kTimeEps && t + kTimeEps < e.start + e.duration) pumping = true;
        if (e.kind == PulseKind::assist_on && e.start <= t + kTimeEps) assist_now = true;
        if (e.kind == PulseKind::assist_off && e.start <= t + kTimeEps) assist_now = false;
      }
      if (assist_now && !assisting) wave_.partner_amp = {0.0, 0.0};
      assisting = assist_now;
      if (pumping) {
        pump_reset(atoms_, exp_.beams.pump);
        reservoir_pop1_ = 1.0;
      }

      double leak_now = 0.0;
      for (const PulseEvent& e : seq_.events) {
        if (e.kind != PulseKind::write) continue;
        if (e.signal_energy > 0.0) {
          const double sigma = kFwhmToSigma * e.duration;
          const double x = (t - e.centre()) / sigma;
          leak_now += (1.0 - write_eff) * std::exp(-0.5 * x * x) / (sigma * std::sqrt(phys::kTwoPi));
        }
        if (e.centre() > t - dt + kTimeEps && e.centre() <= t + kTimeEps) {
          wave_ = SpinWaveState{};
          if (e.signal_energy > 0.0) {
            const WriteResult w = imprint_write(atoms_, vectors_, read_mode_, write_eff);
            result_.write_efficiency = write_eff;
            result_.leaked_fraction = w.leaked_fraction;
            wave_.n_excitations = w.stored_excitations;
            imprinted_ = true;
          } else {
            result_.write_efficiency = 0.0;
            result_.leaked_fraction = 0.0;
          }
        }
      }

      double retrieved_now = 0.0;
      for (const ReadWindow& w : windows) {
        const double a = t - 0.5 * dt;
        const double b = t + 0.5 * dt;
        if (b <= w.lo || a >= w.hi) continue;
        retrieved_now += read_step(w, a, b, q_noise);
      }

      ModeSnapshot snap;
      bool have_snap = false;
      auto take = [&]() {
        if (!have_snap) {
          snap = snapshot(atoms_, vectors_, read_mode_, &exp_.beams.probe);
          have_snap = true;
        }
      };
      while (next_probe < options_.probe_times.size() && options_.probe_times[next_probe] <= t + kTimeEps) {
        take();
        result_.probe_efficiency[next_probe] = std::norm(snap.projection);
        ++next_probe;
      }
      if (k % std::max<std::size_t>(1, options_.trace_stride) == 0) {
        take();
        result_.time.push_back(t);
        result_.signal_out.push_back(retrieved_now / dt);
        result_.leak_out.push_back(leak_now);
        result_.mode_excitation.push_back(std::norm(snap.projection));
        result_.stored.push_back(stored_excitations(atoms_));
        result_.pop1.push_back(snap.pop1);
        result_.pop2.push_back(snap.pop2);
        result_.transmission.push_back(probe_transmission(snap.probe_pop2, exp_.memory.optical_depth));
        result_.noise.push_back(wave_.noise_excitations);
      }
      if (options_.stop_below && next_probe > 0 &&
          result_.probe_efficiency[next_probe - 1] < *options_.stop_below) {
        result_.probe_times.resize(next_probe);
        result_.probe_efficiency.resize(next_probe);
        break;
      }
    }
    for (ReadOutcome& r : result_.reads) {
      r.efficiency_stored = write_eff > 0.0 ? r.efficiency / write_eff : 0.0;
    }
    return std::move(result_);
  }

 private:
  void step(double dt, bool pumping, bool assisting) {
    // Audit of excitation sinks; skipped until something has been stored.
    const double stored_before = imprinted_ ? stored_excitations(atoms_) : 0.0;
    result_.replaced_atoms += advance_ballistic(atoms_, dt, cfg_, seed_, reservoir_pop1_);
    const double stored_moved = imprinted_ ? stored_excitations(atoms_) : 0.0;
    result_.transit_loss += stored_before - stored_moved;
    const MemoryModel& m = exp_.memory;
    if (m.dark_lifetime > 0.0 && !pumping) {
      relax_populations(atoms_, dt, m.dark_lifetime, m.equilibrium_pop1);
      reservoir_pop1_ = m.equilibrium_pop1 + (reservoir_pop1_ - m.equilibrium_pop1) * std::exp(-dt / m.dark_lifetime);
    }
    if (assisting) {
      gain_.assist_on = true;
      apply_gain_tick(atoms_, wave_, gain_, vectors_, dt, &scratch_);
      const double stored_gain = imprinted_ ? stored_excitations(atoms_) : 0.0;
      result_.gain_added += stored_gain - stored_moved;
      depolarize_tick(atoms_, gain_, dt);
      if (imprinted_) result_.quench_loss += stored_gain - stored_excitations(atoms_);
      reservoir_pop1_ *= std::exp(-gain_.depol_rate * m.reservoir_illumination * dt);
    }
  }

  // Retrieval during [a, b) of read window w; returns energy sent into the
  // signal mode.
  double read_step(const ReadWindow& w, double a, double b, const Vec3& q_noise) {
    const double before = w.cdf(a);
    const double after = w.cdf(b);
    const double remaining = 1.0 - before;
    if (remaining <= 0.0 || after <= before) return 0.0;
    const double share = std::min(1.0, (after - before) / remaining);

    const double stored_before_read = imprinted_ ? stored_excitations(atoms_) : 0.0;
    double retrieved = 0.0;
    if (exp_.memory.read_depletion == ReadDepletion::projective) {
      const ModeSnapshot before_read = snapshot(atoms_, vectors_, read_mode_, nullptr);
      if (before_read.norm2 == 0.0) return 0.0;
      retrieved = share * std::norm(before_read.projection);
      const std::complex<double> coeff =
          (std::sqrt(1.0 - share) - 1.0) * before_read.projection / std::sqrt(before_read.norm2);
      for (Atom& at : atoms_) {
        const double u = truncated_beam_weight(at.position, read_mode_);
        if (u == 0.0) continue;
        at.amp += coeff * u * unit_phase(dot(vectors_.delta_k, at.position));
      }
    } else {
      // The emitted energy is the drop of the read-mode excitation.
      const double mode_before = std::norm(snapshot(atoms_, vectors_, read_mode_, nullptr).projection);
      const double strength = 0.5 * exp_.memory.read_strength * (after - before);
      for (Atom& at : atoms_) {
        if (at.amp == std::complex<double>{}) continue;
        const double c = truncated_beam_weight(at.position, exp_.beams.control);
        if (c > 0.0) at.amp *= std::exp(-strength * c);
      }
      const double mode_after = std::norm(snapshot(atoms_, vectors_, read_mode_, nullptr).projection);
      retrieved = std::max(0.0, mode_before - mode_after);
    }

    double noise = 0.0;
    if (wave_.noise_excitations > 0.0) {
      std::vector<Vec3> positions(atoms_.size());
      for (std::size_t j = 0; j < atoms_.size(); ++j) positions[j] = atoms_[j].position;
      noise = (after - before) * wave_.noise_excitations * std::norm(interference_sum(positions, q_noise));
    }
    if (imprinted_) result_.read_loss += stored_before_read - stored_excitations(atoms_) - retrieved;
    ReadOutcome& out = result_.reads[w.index];
    out.efficiency += retrieved + noise;
    out.noise += noise;
    return retrieved + noise;
  }

  const PulseSequence& seq_;
  const Experiment& exp_;
  const RunOptions& options_;
  std::uint64_t seed_;
  EnsembleConfig cfg_;
  WaveVectors vectors_;
  BeamGeometry read_mode_;
  GainModel gain_;
  GainScratch scratch_;
  std::vector<Atom> atoms_;
  SpinWaveState wave_;
  double reservoir_pop1_ = 1.0;
  bool imprinted_ = false;
  TraceResult result_;
};

void accumulate(std::vector<double>& sum, const std::vector<double>& x) {
  if (sum.size() < x.size()) sum.resize(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) sum[i] += x[i];
}

void scale(std::vector<double>& v, double s) {
  for (double& x : v) x *= s;
}

}  // namespace

std::string_view to_string(PulseKind kind) {
  switch (kind) {
    case PulseKind::pump: return "pump";
    case PulseKind::write: return "write";
    case PulseKind::read: return "read";
    case PulseKind::assist_on: return "assist_on";
    case PulseKind::assist_off: return "assist_off";
    case PulseKind::probe: return "probe";
  }
  return "unknown";
}

std::optional<PulseKind> parse_pulse_kind(std::string_view name) {
  for (PulseKind k : {PulseKind::pump, PulseKind::write, PulseKind::read, PulseKind::assist_on,
                      PulseKind::assist_off, PulseKind::probe}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(ReadDepletion mode) {
  return mode == ReadDepletion::projective ? "projective" : "control_weighted";
}

std::optional<ReadDepletion> parse_read_depletion(std::string_view name) {
  if (name == "projective") return ReadDepletion::projective;
  if (name == "control_weighted") return ReadDepletion::control_weighted;
  return std::nullopt;
}

void validate(const PulseSequence& seq) {
  if (!(seq.dt > 0.0)) throw ValidationError("sequence dt must be positive");
  if (seq.trial_count == 0) throw ValidationError("trial_count must be at least 1");
  bool assist = false;
  for (std::size_t i = 0; i < seq.events.size(); ++i) {
    const PulseEvent& e = seq.events[i];
    if (i > 0 && e.start < seq.events[i - 1].start) throw ValidationError("pulse events must be sorted by start time");
    if (is_pulse(e.kind) && !(e.duration > 0.0)) {
      throw ValidationError(std::string(to_string(e.kind)) + " pulse needs a positive duration");
    }
    if (e.kind == PulseKind::assist_on) {
      if (assist) throw ValidationError("assist_on while assisted light is already on");
      assist = true;
    }
    if (e.kind == PulseKind::assist_off) {
      if (!assist) throw ValidationError("assist_off without a preceding assist_on");
      assist = false;
    }
    for (std::size_t j = 0; j < i; ++j) {
      const PulseEvent& p = seq.events[j];
      if (p.kind == e.kind && is_pulse(e.kind) && p.start + p.duration > e.start + kTimeEps) {
        throw ValidationError(std::string(to_string(e.kind)) + " pulses overlap");
      }
      if (p.kind == PulseKind::pump && e.kind == PulseKind::write &&
          p.start + p.duration > e.start - kPumpMinLead + kTimeEps) {
        throw ValidationError("pump must end at least 100 ns before the write pulse");
      }
    }
  }
}

WaveVectors Experiment::wave_vectors() const {
  return make_wave_vectors(ensemble.species, beams.signal, beams.control, beams.assist_laser);
}

BeamGeometry Experiment::read_mode() const { return matched_mode(beams.signal, beams.control); }

Vec3 Experiment::noise_mismatch() const {
  const WaveVectors v = wave_vectors();
  const Vec3 k_raman = raman_scattered_wavevector(ensemble.species, beams.signal.axis);
  return (v.k_assist - k_raman) - v.delta_k;
}

Experiment reference_experiment() {
  Experiment exp;
  exp.beams.signal = make_beam(240e-6);
  exp.beams.control = make_beam(300e-6);
  exp.beams.assist_laser = make_beam(190e-6, Vec3{1e-3, 0.0, 0.0}, 4e-3);
  exp.beams.pump = make_beam(5e-3);
  exp.beams.probe = make_beam(300e-6);
  exp.gain.assist_beam = make_beam(240e-6);
  exp.gain.kappa = kDefaultKappa;
  exp.gain.depol_rate = 4e5;
  exp.gain.partner_decay = 1e6;
  exp.memory.reservoir_illumination = 1.0;
  return exp;
}

PulseSequence fig2_sequence(bool with_assist, bool with_signal, double dt) {
  PulseSequence seq;
  seq.dt = dt;
  seq.events.push_back({PulseKind::pump, -700e-9, 1015e-9, 23e-3, 0.0, 0.0});
  seq.events.push_back({PulseKind::write, 415e-9, 70e-9, 2e-9, -2.9e9, with_signal ? 13e-12 : 0.0});
  if (with_assist) {
    seq.events.push_back({PulseKind::assist_on, 485e-9, 0.0, 10e-3, -0.8e9, 0.0});
    seq.events.push_back({PulseKind::assist_off, 815e-9, 0.0, 0.0, 0.0, 0.0});
  }
  seq.events.push_back({PulseKind::read, 1135e-9, 70e-9, 2e-9, -2.9e9, 0.0});
  seq.events.push_back({PulseKind::read, 1465e-9, 70e-9, 2e-9, -2.9e9, 0.0});
  return seq;
}

double photons_in_pulse(double energy, double wavelength) {
  return energy * wavelength / (phys::kPlanck * phys::kSpeedOfLight);
}

void relax_populations(std::span<Atom> atoms, double dt, double lifetime, double equilibrium_pop1) {
  if (dt <= 0.0 || lifetime <= 0.0) return;
  const double f = std::exp(-dt / lifetime);
  for (Atom& a : atoms) {
    a.pop1 = equilibrium_pop1 + (a.pop1 - equilibrium_pop1) * f;
    a.pop2 = 1.0 - a.pop1;
  }
}

TraceResult run_sequence(const PulseSequence& seq, const Experiment& exp, const RunOptions& options) {
  validate(seq);
  validate_experiment(exp);
  if (!std::is_sorted(options.probe_times.begin(), options.probe_times.end())) {
    throw ValidationError("probe times must be sorted");
  }

  TraceResult total;
  const double n = static_cast<double>(seq.trial_count);
  for (std::size_t i = 0; i < seq.trial_count; ++i) {
    TraceResult r = TrialRunner(seq, exp, options, derive_seed(exp.ensemble.rng_seed, i)).run();
    if (i == 0) {
      total = std::move(r);
      continue;
    }
    accumulate(total.signal_out, r.signal_out);
    accumulate(total.leak_out, r.leak_out);
    accumulate(total.mode_excitation, r.mode_excitation);
    accumulate(total.stored, r.stored);
    accumulate(total.pop1, r.pop1);
    accumulate(total.pop2, r.pop2);
    accumulate(total.transmission, r.transmission);
    accumulate(total.noise, r.noise);
    accumulate(total.probe_efficiency, r.probe_efficiency);
    for (std::size_t j = 0; j < total.reads.size(); ++j) {
      total.reads[j].efficiency += r.reads[j].efficiency;
      total.reads[j].efficiency_stored += r.reads[j].efficiency_stored;
      total.reads[j].noise += r.reads[j].noise;
    }
    total.replaced_atoms += r.replaced_atoms;
    total.transit_loss += r.transit_loss;
    total.read_loss += r.read_loss;
    total.quench_loss += r.quench_loss;
    total.gain_added += r.gain_added;
  }
  if (seq.trial_count > 1) {
    const double s = 1.0 / n;
    for (auto* v : {&total.signal_out, &total.leak_out, &total.mode_excitation, &total.stored, &total.pop1,
                    &total.pop2, &total.transmission, &total.noise, &total.probe_efficiency}) {
      scale(*v, s);
    }
    total.transit_loss *= s;
    total.read_loss *= s;
    total.quench_loss *= s;
    total.gain_added *= s;
    for (ReadOutcome& r : total.reads) {
      r.efficiency *= s;
      r.efficiency_stored *= s;
      r.noise *= s;
    }
  }
  return total;
}

Fig2Result fig2_experiment(const Experiment& exp) {
  Fig2Result out;
  const auto window_of = [&](const TraceResult& r, double centre, std::vector<double>& t, std::vector<double>& y) {
    const double half = kReadHalfWindow * exp.memory.read_fwhm;
    for (std::size_t i = 0; i < r.time.size(); ++i) {
      if (r.time[i] < centre - half || r.time[i] > centre + half) continue;
      t.push_back(r.time[i]);
      y.push_back(r.signal_out[i]);
    }
  };
  const auto shape = [&](const TraceResult& r) {
    std::vector<double> t, y;
    window_of(r, r.reads.at(0).centre, t, y);
    return gaussian_shape_residual(t, y);
  };

  out.no_assist = run_sequence(fig2_sequence(false, true, exp.dt), exp);
  out.assist = run_sequence(fig2_sequence(true, true, exp.dt), exp);
  out.assist_no_signal = run_sequence(fig2_sequence(true, false, exp.dt), exp);

  out.s_leak = out.no_assist.leaked_fraction;
  out.s_out_noA = out.no_assist.reads.at(0).efficiency;
  out.r2_noA = out.no_assist.reads.at(1).efficiency;
  out.s_out_A = out.assist.reads.at(0).efficiency;
  out.r2_A = out.assist.reads.at(1).efficiency;
  out.s_out_A_noSin = out.assist_no_signal.reads.at(0).efficiency;
  out.r2_A_noSin = out.assist_no_signal.reads.at(1).efficiency;
  out.shape_residual_noA = shape(out.no_assist);
  out.shape_residual_A = shape(out.assist);
  return out;
}

LifetimeCurve lifetime_scan(std::span<const double> delays, bool assist, const Experiment& exp,
                            bool stop_after_crossing) {
  if (!std::is_sorted(delays.begin(), delays.end())) throw ValidationError("delays must be sorted ascending");
  if (!delays.empty() && delays.front() < 0.0) throw ValidationError("delays must be >= 0");

  const PulseSequence fig2 = fig2_sequence(assist, true, exp.dt);
  PulseSequence seq;
  seq.dt = exp.dt;
  for (const PulseEvent& e : fig2.events) {
    if (e.kind == PulseKind::read || e.kind == PulseKind::assist_off) continue;
    seq.events.push_back(e);
  }
  double write_centre = 0.0;
  for (const PulseEvent& e : seq.events) {
    if (e.kind == PulseKind::write) write_centre = e.centre();
  }

  RunOptions options;
  options.trace_stride = std::numeric_limits<std::size_t>::max();
  options.probe_times.push_back(write_centre);
  for (double d : delays) options.probe_times.push_back(write_centre + d);
  options.t_end = options.probe_times.back();
  // The zero-delay sample equals the write efficiency, so stopping just under
  // efficiency/e keeps the first sample past the 1/e crossing.
  if (stop_after_crossing) options.stop_below = 0.99 * exp.memory.write_efficiency * std::exp(-1.0);

  const TraceResult r = run_sequence(seq, exp, options);
  LifetimeCurve curve;
  curve.reference = r.probe_efficiency.at(0);
  for (std::size_t i = 1; i < r.probe_efficiency.size(); ++i) {
    curve.delay.push_back(delays[i - 1]);
    curve.efficiency.push_back(r.probe_efficiency[i]);
  }
  curve.one_over_e = one_over_e_time(curve.delay, curve.efficiency, curve.reference);
  return curve;
}

double franzen_tp(double t, double lifetime, double tp_initial, double tp_equilibrium) {
  if (!(lifetime > 0.0)) throw ValidationError("lifetime must be positive");
  return tp_equilibrium + (tp_initial - tp_equilibrium) * std::exp(-t / lifetime);
}

TpCurve tp_experiment(bool assist, const Experiment& exp, double t_max, std::size_t samples) {
  validate_experiment(exp);
  if (!(t_max > 0.0) || samples < 2) throw ValidationError("tp_experiment needs t_max > 0 and at least 2 samples");

  EnsembleConfig cfg = exp.ensemble;
  std::vector<Atom> atoms = sample_ensemble(cfg);
  GainModel gain = exp.gain;
  gain.assist_on = true;
  const MemoryModel& m = exp.memory;
  double reservoir = 1.0;

  TpCurve curve;
  const auto record = [&](double t) {
    double sum_w = 0.0, sum_p1 = 0.0;
    for (const Atom& a : atoms) {
      const double w = truncated_beam_weight(a.position, exp.beams.probe);
      sum_w += w;
      sum_p1 += w * a.pop1;
    }
    const double pop1 = sum_w > 0.0 ? sum_p1 / sum_w : 1.0;
    curve.time.push_back(t);
    curve.pop1.push_back(pop1);
    curve.transmission.push_back(probe_transmission(1.0 - pop1, m.optical_depth));
  };

  const double dt = exp.tp_dt;
  const double spacing = t_max / static_cast<double>(samples - 1);
  const auto n_steps = static_cast<std::size_t>(std::llround(t_max / dt));
  std::size_t next = 0;
  for (std::size_t k = 0; k <= n_steps && next < samples; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k > 0) {
      advance_ballistic(atoms, dt, cfg, cfg.rng_seed, reservoir);
      if (m.dark_lifetime > 0.0) {
        relax_populations(atoms, dt, m.dark_lifetime, m.equilibrium_pop1);
        reservoir = m.equilibrium_pop1 + (reservoir - m.equilibrium_pop1) * std::exp(-dt / m.dark_lifetime);
      }
      if (assist) {
        depolarize_tick(atoms, gain, dt);
        reservoir *= std::exp(-gain.depol_rate * m.reservoir_illumination * dt);
      }
    }
    while (next < samples && static_cast<double>(next) * spacing <= t + 0.5 * dt) {
      record(t);
      ++next;
    }
  }

  std::vector<double> absorbance(curve.transmission.size());
  for (std::size_t i = 0; i < absorbance.size(); ++i) absorbance[i] = -std::log(curve.transmission[i]) / m.optical_depth;
  curve.absorbance_fit = fit_exponential_relaxation(curve.time, absorbance, 1e-8, 1e-2);
  curve.fitted_lifetime = curve.absorbance_fit.lifetime;
  curve.tp_initial = probe_transmission(curve.absorbance_fit.initial, m.optical_depth);
  curve.tp_equilibrium = probe_transmission(curve.absorbance_fit.equilibrium, m.optical_depth);
  return curve;
}

}  // namespace spinregen
