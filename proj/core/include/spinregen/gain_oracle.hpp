#pragma once

#include <cstddef>

namespace spinregen {

struct OracleResult {
  double mean = 0.0;
  double variance = 0.0;
  // Probability left in the last retained basis state.
  double truncation_population = 0.0;
  std::size_t cutoff = 0;
};

/// Minimum partner-mode cutoff accepted by two_mode_gain_oracle.
std::size_t minimum_oracle_cutoff(int n0, double kappa_t);

/// Exact numerics for the two-mode parametric amplifier.
///
/// Starts from |n0>|0> and integrates exp(kappa_t (a^dag b^dag - a b)) on the
/// truncated chain |n0 + k, k>, k = 0..fock_cutoff, which is invariant under
/// the generator. Returns mean and variance of a^dag a.
/// Throws ValidationError for negative n0, kappa_t outside [0, 2] or a cutoff
/// below minimum_oracle_cutoff, TruncationError if more than 1e-10 of the
/// population sits in the last basis state.
OracleResult two_mode_gain_oracle(int n0, double kappa_t, std::size_t fock_cutoff);

/// Runs the oracle with a cutoff doubled from the minimum until the edge
/// population is below `edge_tolerance`.
OracleResult converged_gain_oracle(int n0, double kappa_t, double edge_tolerance = 1e-24);

}  // namespace spinregen
