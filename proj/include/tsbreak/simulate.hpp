#ifndef TSBREAK_SIMULATE_HPP
#define TSBREAK_SIMULATE_HPP

#include "tsbreak/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

/// Structural-break VAR data generation.
///
/// Randomness comes from std::mt19937_64 seeded with BreakVarSpec::seed; Gaussian
/// draws use std::normal_distribution (Marsaglia polar method in libstdc++).
/// Output is bit-identical for a given seed within one build.
namespace tsbreak::simulate {

/// Piecewise-stationary VAR(K). Regime i is active for original times
/// t in (break_times[i-1], break_times[i]].
struct BreakVarSpec {
  Index dim = 1;
  Index lag = 1;
  Index n_times = 0;
  std::vector<Index> break_times;
  std::vector<Matrix> segment_coeffs;  // p x pK each
  double noise_sd = 0.1;
  std::uint64_t seed = 0;
  /// Steps run under regime 1 and discarded before t = 1.
  Index burn_in = 200;
  /// Optional starting lags, K x p with row k-1 = x_{-k+1} relative to the
  /// first simulated step. Zero when absent.
  std::optional<Matrix> initial_state;

  /// Throws ConfigError on bad shapes, unsorted or out-of-range breaks, or a
  /// non-stationary regime.
  void validate() const;
};

/// Defaults for drawing random regimes.
struct RegimeDefaults {
  double noise_sd = 0.1;
  double radius_cap = 0.9;
  double min_regime_distance = 0.5;
  Index burn_in = 200;
};

/// pK x pK companion matrix of p x pK stacked coefficients.
Matrix companion(const Matrix& coeffs);

/// Largest absolute eigenvalue of the companion matrix.
double spectral_radius(const Matrix& coeffs);

/// Gaussian coefficients (sd 1/sqrt(pK)), rescaled so the companion spectral
/// radius is below `radius_cap`. Deterministic in `seed`.
Matrix random_stable_var(Index dim, Index lag, double radius_cap, std::uint64_t seed);

/// A spec with one random stable regime per segment, consecutive regimes at
/// least `min_regime_distance` apart in Frobenius norm.
BreakVarSpec random_break_spec(Index dim, Index lag, Index n_times,
                               std::vector<Index> break_times, std::uint64_t seed,
                               const RegimeDefaults& defaults = {});

TimeSeries simulate_break_var(const BreakVarSpec& spec);

}  // namespace tsbreak::simulate

#endif  // TSBREAK_SIMULATE_HPP
