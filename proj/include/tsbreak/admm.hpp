#ifndef TSBREAK_ADMM_HPP
#define TSBREAK_ADMM_HPP

#include "tsbreak/core.hpp"
#include "tsbreak/kalman.hpp"

#include <functional>
#include <vector>

namespace tsbreak::admm {

/// Scaled-form ADMM iterate for
///   min ||Y - X theta||^2 + lambda sum_{t>=2} ||W^t||_F   s.t. theta = W.
struct AdmmState {
  DiffPath theta;
  DiffPath w;
  DiffPath omega;  // scaled dual
  Index iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double rho = 1.0;
};

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
};

/// Exact minimizer over theta of ||Y - X theta||^2 + rho/2 ||theta - W + Omega||^2,
/// solved row by row with the Kalman smoother. `threads` <= 1 runs serially;
/// 0 picks the hardware concurrency.
DiffPath theta_update(const LaggedDesign& design, const DiffPath& w, const DiffPath& omega,
                      double rho, unsigned threads = 1);

/// Same, reusing a schedule built for (design.lags, rho).
DiffPath theta_update(const kalman::SmootherSchedule& schedule, const LaggedDesign& design,
                      const DiffPath& w, const DiffPath& omega, unsigned threads = 1);

/// Proximal operator of kappa ||.||_F.
Matrix group_soft_threshold(const Eigen::Ref<const Matrix>& v, double kappa);

/// W^1 = theta^1 + Omega^1 (unpenalized); W^t = prox(theta^t + Omega^t, lambda/rho).
DiffPath w_update(const DiffPath& theta, const DiffPath& omega, double lambda, double rho);

/// Omega + theta - W.
DiffPath dual_update(const DiffPath& omega, const DiffPath& theta, const DiffPath& w);

/// primal = ||theta - W||_F, dual = rho ||W - W_prev||_F over the whole stack.
Residuals residuals(const DiffPath& theta, const DiffPath& w, const DiffPath& w_prev, double rho);

struct Progress {
  Index iteration;
  double primal;
  double dual;
  double rho;
};

struct SolveOptions {
  unsigned threads = 1;
  /// Called every `progress_every` iterations when set.
  std::function<void(const Progress&)> progress;
  Index progress_every = 50;
};

struct SolveResult {
  /// Final W: the sparse estimate. Fused blocks are exactly zero.
  DiffPath estimate;
  AdmmState state;
  LaggedDesign design;
  bool converged = false;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  /// Penalized objective evaluated at `estimate`.
  double objective = 0.0;
};

/// Runs ADMM from theta = W = Omega = 0 until both residuals fall under
///   eps_p = sqrt(n) eps_abs + eps_rel max(||theta||, ||W||)
///   eps_d = sqrt(n) eps_abs + eps_rel rho ||Omega||
/// (n = T p pK) or max_iter is reached. Non-convergence is reported via
/// `converged`, never thrown.
SolveResult solve(const TimeSeries& series, const SolverConfig& config,
                  const SolveOptions& options = {});

SolveResult solve(const LaggedDesign& design, const SolverConfig& config,
                  const SolveOptions& options = {});

}  // namespace tsbreak::admm

#endif  // TSBREAK_ADMM_HPP
