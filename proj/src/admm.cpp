#include "tsbreak/admm.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace tsbreak::admm {

namespace {

void check_shapes(const LaggedDesign& design, const DiffPath& w, const DiffPath& omega) {
  if (!w.same_shape(omega) || w.steps() != design.rows() || w.dim() != design.dim() ||
      w.width() != design.width()) {
    std::ostringstream msg;
    msg << "theta_update: design has T=" << design.rows() << ", p=" << design.dim()
        << ", pK=" << design.width() << " but W/Omega have " << w.steps() << "/"
        << omega.steps() << " blocks of width " << w.width() << "/" << omega.width();
    throw DimensionError(msg.str());
  }
}

void require_same_shape(const DiffPath& a, const DiffPath& b, const char* where) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(where) + ": paths differ in shape");
  }
}

}  // namespace

DiffPath theta_update(const kalman::SmootherSchedule& schedule, const LaggedDesign& design,
                      const DiffPath& w, const DiffPath& omega, unsigned threads) {
  check_shapes(design, w, omega);
  if (schedule.steps() != design.rows() || schedule.width() != design.width()) {
    throw DimensionError("theta_update: smoother schedule does not match the design");
  }
  const Index p = design.dim();
  const Index steps = design.rows();

  Matrix path = w.stacked() - omega.stacked();
  const long chunks = std::min<long>(detail::resolve_threads(threads), static_cast<long>(p));
  detail::parallel_for(chunks, threads, [&](long chunk) {
    const Index first = p * chunk / chunks;
    const Index rows = p * (chunk + 1) / chunks - first;
    schedule.smooth_rows(design.lags, design.targets.middleCols(first, rows),
                         path.middleRows(first, rows));
  });
  const Index width = design.width();
  for (Index t = steps - 1; t >= 1; --t) {
    path.middleCols(t * width, width) -= path.middleCols((t - 1) * width, width);
  }
  return DiffPath(design.lag, std::move(path));
}

DiffPath theta_update(const LaggedDesign& design, const DiffPath& w, const DiffPath& omega,
                      double rho, unsigned threads) {
  check_shapes(design, w, omega);
  const kalman::SmootherSchedule schedule(design.lags, rho);
  return theta_update(schedule, design, w, omega, threads);
}

Matrix group_soft_threshold(const Eigen::Ref<const Matrix>& v, double kappa) {
  const double norm = v.norm();
  if (norm <= kappa || norm == 0.0) {
    return Matrix::Zero(v.rows(), v.cols());
  }
  return (1.0 - kappa / norm) * v;
}

DiffPath w_update(const DiffPath& theta, const DiffPath& omega, double lambda, double rho) {
  require_same_shape(theta, omega, "w_update");
  DiffPath w(theta.lag(), theta.stacked() + omega.stacked());
  const double kappa = lambda / rho;
  if (kappa == 0.0) return w;
  for (Index t = 1; t < w.steps(); ++t) {
    const double norm = w.block(t).norm();
    if (norm <= kappa) {
      w.block(t).setZero();
    } else {
      w.block(t) *= 1.0 - kappa / norm;
    }
  }
  return w;
}

DiffPath dual_update(const DiffPath& omega, const DiffPath& theta, const DiffPath& w) {
  require_same_shape(omega, theta, "dual_update");
  require_same_shape(omega, w, "dual_update");
  return DiffPath(omega.lag(), omega.stacked() + theta.stacked() - w.stacked());
}

Residuals residuals(const DiffPath& theta, const DiffPath& w, const DiffPath& w_prev, double rho) {
  require_same_shape(theta, w, "residuals");
  require_same_shape(w, w_prev, "residuals");
  return {(theta.stacked() - w.stacked()).norm(), rho * (w.stacked() - w_prev.stacked()).norm()};
}

SolveResult solve(const TimeSeries& series, const SolverConfig& config,
                  const SolveOptions& options) {
  config.validate();
  return solve(build_lagged_design(series, config.lag), config, options);
}

SolveResult solve(const LaggedDesign& design, const SolverConfig& config,
                  const SolveOptions& options) {
  config.validate();
  if (design.lag != config.lag) {
    throw ConfigError("solve: design lag does not match config.lag");
  }
  const Index p = design.dim();
  const Index steps = design.rows();
  const double sqrt_n = std::sqrt(static_cast<double>(steps * p * design.width()));

  SolveResult result;
  AdmmState& state = result.state;
  state.rho = config.rho;
  state.theta = DiffPath(p, design.lag, steps);
  state.w = DiffPath(p, design.lag, steps);
  state.omega = DiffPath(p, design.lag, steps);
  auto schedule = std::make_unique<kalman::SmootherSchedule>(design.lags, state.rho);

  for (Index iter = 1; iter <= config.max_iter; ++iter) {
    state.theta = theta_update(*schedule, design, state.w, state.omega, options.threads);
    DiffPath w_prev = std::move(state.w);
    state.w = w_update(state.theta, state.omega, config.lambda, state.rho);
    state.omega = dual_update(state.omega, state.theta, state.w);
    const Residuals res = residuals(state.theta, state.w, w_prev, state.rho);

    state.iteration = iter;
    state.primal_residual = res.primal;
    state.dual_residual = res.dual;
    result.primal_residuals.push_back(res.primal);
    result.dual_residuals.push_back(res.dual);

    const double eps_primal =
        sqrt_n * config.eps_abs +
        config.eps_rel * std::max(state.theta.stacked().norm(), state.w.stacked().norm());
    const double eps_dual =
        sqrt_n * config.eps_abs + config.eps_rel * state.rho * state.omega.stacked().norm();

    if (options.progress && options.progress_every > 0 && iter % options.progress_every == 0) {
      options.progress({iter, res.primal, res.dual, state.rho});
    }
    if (res.primal <= eps_primal && res.dual <= eps_dual) {
      result.converged = true;
      break;
    }

    if (config.adaptive_rho) {
      double scale = 1.0;
      if (res.primal > 10.0 * res.dual) {
        scale = 2.0;
      } else if (res.dual > 10.0 * res.primal) {
        scale = 0.5;
      }
      if (scale != 1.0) {
        state.rho *= scale;
        state.omega.stacked() /= scale;
        schedule = std::make_unique<kalman::SmootherSchedule>(design.lags, state.rho);
      }
    }
  }

  result.estimate = state.w;
  result.objective = objective(result.estimate, design, config.lambda);
  result.design = design;
  return result;
}

}  // namespace tsbreak::admm
