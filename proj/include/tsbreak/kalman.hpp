#ifndef TSBREAK_KALMAN_HPP
#define TSBREAK_KALMAN_HPP

#include "tsbreak/core.hpp"

#include <vector>

namespace tsbreak::kalman {

/// One row j of the global ADMM update:
///
///   min_{a^1..a^T} sum_t (x_tj - xtilde_t^T a^t)^2
///                  + rho/2 sum_t ||a^t - a^{t-1} - mu_t||^2,   a^0 = 0.
///
/// This is the negative log-likelihood of the random walk
/// a^t = a^{t-1} + mu_t + N(0, I/rho) observed through
/// x_tj = xtilde_t^T a^t + N(0, 1/2), so its minimizer is the smoothed mean.
struct RowSmoothingProblem {
  Vector targets;     // T
  Matrix regressors;  // T x pK, row t = xtilde_t^T
  Matrix bias;        // pK x T, column t = mu_t
  double rho = 1.0;

  Index steps() const { return targets.size(); }
  Index width() const { return regressors.cols(); }
  void validate() const;
};

struct SmoothedRow {
  Matrix states;  // pK x T, column t = a^t
  /// Smoothed covariances, filled only on request.
  std::vector<Matrix> covariances;
};

/// The parts of the filter/smoother that depend only on the regressors and
/// rho: Kalman gains and backward smoother gains. Every row of a given
/// ADMM iteration shares one schedule.
class SmootherSchedule {
 public:
  SmootherSchedule() = default;

  /// Runs the covariance recursions. O(T (pK)^3).
  /// Throws SolverError if a predicted covariance fails to factor.
  SmootherSchedule(const Matrix& regressors, double rho, bool keep_covariances = false);

  Index steps() const { return gains_.cols(); }
  Index width() const { return gains_.rows(); }
  double rho() const { return rho_; }

  /// K^t, column t.
  const Matrix& gains() const { return gains_; }
  /// C^t = Sigma^{t|t} (Sigma^{t+1|t})^{-1}, for t = 0..T-2.
  auto smoother_gain(Index t) const { return smoother_gains_.middleCols(t * width(), width()); }
  /// Filtered covariances Sigma^{t|t}; empty unless requested.
  const std::vector<Matrix>& filtered_covariances() const { return filtered_; }
  /// Smoothed covariances Sigma^t; empty unless requested.
  const std::vector<Matrix>& smoothed_covariances() const { return smoothed_; }

  /// Forward filter and backward smoother for the means of one row.
  /// `bias` and `states` are pK x T; `states` must be preallocated.
  void smooth(const Matrix& regressors, const Eigen::Ref<const Vector>& targets,
              const Eigen::Ref<const Matrix>& bias, Eigen::Ref<Matrix> states) const;

  /// Same recursion for m rows at once in the stacked layout: `targets` is
  /// T x m and `bias_in_states_out` is m x (pK T) with block t in columns
  /// [t pK, (t+1) pK). It holds the biases on entry and the smoothed states on
  /// return. Each row's arithmetic does not depend on m.
  void smooth_rows(const Matrix& regressors, const Eigen::Ref<const Matrix>& targets,
                   Eigen::Ref<Matrix> bias_in_states_out) const;

 private:
  double rho_ = 0.0;
  Matrix gains_;
  Matrix smoother_gains_;  // pK x pK (T-1), C^t in block t
  std::vector<Matrix> filtered_;
  std::vector<Matrix> smoothed_;
};

/// Exact minimizer of the row problem by Kalman filtering and
/// Rauch-Tung-Striebel smoothing, linear in T.
SmoothedRow smooth_row(const RowSmoothingProblem& problem, bool keep_covariances = false);

/// Value of the row objective at `states` (pK x T).
double row_objective(const RowSmoothingProblem& problem, const Matrix& states);

/// Dense normal-equations solve of the same problem. Verification oracle;
/// refuses T * pK > 2000.
SmoothedRow dense_row_solve(const RowSmoothingProblem& problem);

inline constexpr Index kDenseRowLimit = 2000;

}  // namespace tsbreak::kalman

#endif  // TSBREAK_KALMAN_HPP
