#include "spinregen/gain_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spinregen/error.hpp"

namespace spinregen {

namespace {

constexpr double kTruncationLimit = 1e-10;

// Generator of exp(kappa_t (a^dag b^dag - a b)) restricted to |n0+k, k>.
// It is real antisymmetric and tridiagonal with off-diagonal
// couplings[k] = <n0+k+1, k+1| a^dag b^dag |n0+k, k>.
class ChainGenerator {
 public:
  ChainGenerator(int n0, std::size_t cutoff) : couplings_(cutoff) {
    for (std::size_t k = 0; k < cutoff; ++k) {
      couplings_[k] = std::sqrt((static_cast<double>(n0) + k + 1.0) * (k + 1.0));
    }
  }

  std::size_t size() const { return couplings_.size() + 1; }

  double norm_bound() const {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < couplings_.size(); ++k) m = std::max(m, couplings_[k] + couplings_[k + 1]);
    if (!couplings_.empty()) m = std::max(m, couplings_.back());
    return m;
  }

  // out = A in
  void apply(const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k) {
      double v = 0.0;
      if (k > 0) v += couplings_[k - 1] * in[k - 1];
      if (k + 1 < n) v -= couplings_[k] * in[k + 1];
      out[k] = v;
    }
  }

 private:
  std::vector<double> couplings_;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Truncated Taylor series of exp(h A) applied to `state`, with h ||A|| <= 1/2.
void evolve(const ChainGenerator& gen, double tau, std::vector<double>& state) {
  const double bound = gen.norm_bound();
  if (bound == 0.0 || tau == 0.0) return;
  const double h_max = 0.5 / bound;
  const auto steps = static_cast<std::size_t>(std::ceil(tau / h_max));
  const double h = tau / static_cast<double>(steps);

  std::vector<double> term(state.size());
  std::vector<double> next(state.size());
  for (std::size_t s = 0; s < steps; ++s) {
    term = state;
    const double scale = max_abs(state);
    for (int m = 1; m < 200; ++m) {
      gen.apply(term, next);
      const double f = h / m;
      for (std::size_t k = 0; k < next.size(); ++k) {
        term[k] = f * next[k];
        state[k] += term[k];
      }
      if (max_abs(term) <= 1e-18 * scale) break;
    }
  }
}

}  // namespace

std::size_t minimum_oracle_cutoff(int n0, double kappa_t) {
  return static_cast<std::size_t>(std::ceil(n0 + 10.0 * (1.0 + 5.0 * kappa_t)));
}

OracleResult two_mode_gain_oracle(int n0, double kappa_t, std::size_t fock_cutoff) {
  if (n0 < 0) throw ValidationError("oracle needs n0 >= 0");
  if (!(kappa_t >= 0.0 && kappa_t <= 2.0)) throw ValidationError("oracle needs kappa_t in [0, 2]");
  if (fock_cutoff < minimum_oracle_cutoff(n0, kappa_t)) {
    throw ValidationError("fock_cutoff " + std::to_string(fock_cutoff) + " below the minimum " +
                          std::to_string(minimum_oracle_cutoff(n0, kappa_t)));
  }

  const ChainGenerator gen(n0, fock_cutoff);
  std::vector<double> state(gen.size(), 0.0);
  state[0] = 1.0;
  evolve(gen, kappa_t, state);

  double total = 0.0;
  double mean_k = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double p = state[k] * state[k];
    total += p;
    mean_k += p * static_cast<double>(k);
  }
  mean_k /= total;
  double var = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double d = static_cast<double>(k) - mean_k;
    var += state[k] * state[k] * d * d;
  }

  OracleResult result;
  result.mean = static_cast<double>(n0) + mean_k;
  result.variance = var / total;
  result.truncation_population = state.back() * state.back() / total;
  result.cutoff = fock_cutoff;
  if (result.truncation_population > kTruncationLimit) {
    throw TruncationError("population " + std::to_string(result.truncation_population) +
                          " at cutoff " + std::to_string(fock_cutoff) + " exceeds 1e-10");
  }
  return result;
}

OracleResult converged_gain_oracle(int n0, double kappa_t, double edge_tolerance) {
  std::size_t cutoff = minimum_oracle_cutoff(n0, kappa_t);
  for (;;) {
    try {
      OracleResult r = two_mode_gain_oracle(n0, kappa_t, cutoff);
      if (r.truncation_population <= edge_tolerance) return r;
    } catch (const TruncationError&) {
    }
    cutoff *= 2;
    if (cutoff > (1u << 16)) throw TruncationError("oracle cutoff did not converge");
  }
}

}  // namespace spinregen
