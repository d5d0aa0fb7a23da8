#include "spinregen/regeneration.hpp"

#include <cmath>

#include "spinregen/error.hpp"

namespace spinregen {

namespace {

// Beyond about 4.2 waists exp(-2 r^2/w^2) < 1e-15 and contributes nothing.
constexpr double kNegligibleWeight = 1e-15;

}  // namespace

void validate(const GainModel& model) {
  if (!(model.kappa >= 0.0)) throw ValidationError("kappa must be >= 0");
  if (!(model.depol_rate >= 0.0)) throw ValidationError("depol_rate must be >= 0");
  if (!(model.partner_decay >= 0.0)) throw ValidationError("partner_decay must be >= 0");
  validate(model.assist_beam);
}

double mean_excitation(double n0, double kappa, double t) {
  if (t < 0.0) throw ValidationError("mean_excitation requires t >= 0");
  const double c = std::cosh(kappa * t);
  const double s = std::sinh(kappa * t);
  return n0 * c * c + s * s;
}

double excitation_variance(double n0, double kappa, double t) {
  if (t < 0.0) throw ValidationError("excitation_variance requires t >= 0");
  const double s = std::sinh(2.0 * kappa * t);
  return s * s * (1.0 + n0) / 4.0;
}

void apply_gain_tick(std::span<Atom> atoms, SpinWaveState& state, const GainModel& model,
                     const WaveVectors& vectors, double dt, GainScratch* scratch) {
  if (dt < 0.0) throw ContractViolation("apply_gain_tick requires dt >= 0");
  if (model.kappa * dt > kMaxGainStep) {
    throw StepSizeError("gain step kappa*dt = " + std::to_string(model.kappa * dt) + " exceeds " +
                        std::to_string(kMaxGainStep) + "; reduce dt");
  }
  if (!model.assist_on || model.kappa == 0.0 || dt == 0.0) return;

  GainScratch local;
  GainScratch& active = scratch ? *scratch : local;
  active.index.clear();
  active.mode.clear();

  double sum_w = 0.0;
  double sum_w_pop1 = 0.0;
  double g2 = 0.0;
  std::complex<double> proj{0.0, 0.0};
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const Atom& a = atoms[j];
    const double w = truncated_beam_weight(a.position, model.assist_beam);
    if (w < kNegligibleWeight) continue;
    const double phase = dot(vectors.delta_k, a.position);
    const std::complex<double> g = w * a.pop1 * std::complex<double>{std::cos(phase), std::sin(phase)};
    active.index.push_back(j);
    active.mode.push_back(g);
    sum_w += w;
    sum_w_pop1 += w * a.pop1;
    g2 += std::norm(g);
    proj += std::conj(g) * a.amp;
  }
  if (g2 == 0.0 || sum_w == 0.0) return;

  const double kappa_eff = model.kappa * sum_w_pop1 / sum_w;
  const double gnorm = std::sqrt(g2);
  const std::complex<double> a_old = proj / gnorm;
  // exp(M dt) = e^{-G dt/2} [cosh(mu dt) I + sinh(mu dt)/mu (M + G/2 I)],
  // mu = sqrt(k^2 + G^2/4), for M = [[0, k], [k, -G]].
  const double half_decay = 0.5 * model.partner_decay;
  const double mu = std::sqrt(kappa_eff * kappa_eff + half_decay * half_decay);
  const double damp = std::exp(-half_decay * dt);
  const double ch = std::cosh(mu * dt);
  const double sh_mu = mu > 0.0 ? std::sinh(mu * dt) / mu : dt;
  const double e_aa = damp * (ch + sh_mu * half_decay);
  const double e_ab = damp * sh_mu * kappa_eff;
  const double e_bb = damp * (ch - sh_mu * half_decay);
  const std::complex<double> a_new = e_aa * a_old + e_ab * state.partner_amp;
  state.partner_amp = e_ab * a_old + e_bb * state.partner_amp;
  state.collective_amp = a_new;

  const std::complex<double> step = (a_new - a_old) / gnorm;
  for (std::size_t i = 0; i < active.index.size(); ++i) {
    Atom& a = atoms[active.index[i]];
    a.amp += step * active.mode[i];
    enforce_coherence_bound(a);
  }
  state.n_excitations = stored_excitations(atoms);

  state.noise_squeezing += kappa_eff * dt;
  const double sn = std::sinh(state.noise_squeezing);
  state.noise_excitations = sn * sn;
}

void depolarize_tick(std::span<Atom> atoms, const GainModel& model, double dt) {
  if (dt < 0.0) throw ContractViolation("depolarize_tick requires dt >= 0");
  if (!model.assist_on || model.depol_rate == 0.0 || dt == 0.0) return;
  for (Atom& a : atoms) {
    const double w = truncated_beam_weight(a.position, model.assist_beam);
    if (w < kNegligibleWeight) continue;
    const double f = std::exp(-model.depol_rate * w * dt);
    a.pop1 *= f;
    a.pop2 = 1.0 - a.pop1;
    a.amp *= std::sqrt(f);
  }
}

double noise_budget(double raw_noise_counts, double detection_efficiency) {
  if (!(detection_efficiency > 0.0 && detection_efficiency <= 1.0)) {
    throw ValidationError("detection efficiency must lie in (0, 1]");
  }
  if (raw_noise_counts < 0.0) throw ValidationError("raw noise counts must be >= 0");
  return raw_noise_counts / detection_efficiency;
}

}  // namespace spinregen
