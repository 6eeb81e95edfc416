#include "tsbreak/kalman.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace tsbreak::kalman {

void RowSmoothingProblem::validate() const {
  const Index steps_count = targets.size();
  if (steps_count < 1) {
    throw LengthError("RowSmoothingProblem: need T >= 1");
  }
  if (regressors.rows() != steps_count || bias.cols() != steps_count ||
      bias.rows() != regressors.cols()) {
    std::ostringstream msg;
    msg << "RowSmoothingProblem: targets T=" << steps_count << ", regressors "
        << regressors.rows() << "x" << regressors.cols() << ", bias " << bias.rows() << "x"
        << bias.cols() << " (expected T x pK and pK x T)";
    throw DimensionError(msg.str());
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ConfigError("RowSmoothingProblem: rho must be finite and > 0");
  }
  if (!targets.allFinite() || !regressors.allFinite() || !bias.allFinite()) {
    throw DimensionError("RowSmoothingProblem: non-finite input");
  }
}

SmootherSchedule::SmootherSchedule(const Matrix& regressors, double rho, bool keep_covariances)
    : rho_(rho) {
  const Index steps_count = regressors.rows();
  const Index width = regressors.cols();
  const double state_var = 1.0 / rho;
  constexpr double obs_var = 0.5;

  gains_.resize(width, steps_count);
  smoother_gains_.resize(width, width * std::max<Index>(steps_count - 1, 0));
  std::vector<Matrix> predicted;
  if (keep_covariances) {
    filtered_.reserve(static_cast<std::size_t>(steps_count));
    predicted.reserve(static_cast<std::size_t>(steps_count));
  }

  // Prior for a^1 given a^0 = 0.
  Matrix pred = state_var * Matrix::Identity(width, width);
  Matrix filt(width, width);
  Matrix filt_t(width, width);
  Vector pred_x(width);
  Eigen::LLT<Matrix> chol(width);

  for (Index t = 0; t < steps_count; ++t) {
    if (t > 0) {
      pred = filt;
      pred.diagonal().array() += state_var;
      chol.compute(pred);
      if (chol.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "SmootherSchedule: predicted covariance not positive definite at step " << t + 1;
        throw SolverError(msg.str());
      }
      // C^{t-1} = Sigma^{t-1|t-1} P^{-1}; both symmetric, so C^T = P^{-1} Sigma.
      filt_t = filt;
      chol.solveInPlace(filt_t);
      smoother_gains_.middleCols((t - 1) * width, width) = filt_t.transpose();
    }
    if (keep_covariances) predicted.push_back(pred);

    const auto x = regressors.row(t).transpose();
    pred_x.noalias() = pred * x;
    const double innovation_var = obs_var + x.dot(pred_x);
    gains_.col(t) = pred_x / innovation_var;

    filt = pred;
    filt.noalias() -= gains_.col(t) * pred_x.transpose();
    filt_t = filt.transpose();
    filt += filt_t;
    filt *= 0.5;
#ifndef NDEBUG
    assert(Eigen::LLT<Matrix>(filt).info() == Eigen::Success);
#endif
    if (keep_covariances) filtered_.push_back(filt);
  }

  if (keep_covariances && steps_count > 0) {
    smoothed_.assign(static_cast<std::size_t>(steps_count), Matrix());
    smoothed_.back() = filtered_.back();
    for (Index t = steps_count - 2; t >= 0; --t) {
      const auto ut = static_cast<std::size_t>(t);
      const Matrix gain = smoother_gain(t);
      Matrix s = filtered_[ut] + gain * (smoothed_[ut + 1] - predicted[ut + 1]) * gain.transpose();
      smoothed_[ut] = 0.5 * (s + s.transpose());
    }
  }
}

void SmootherSchedule::smooth(const Matrix& regressors, const Eigen::Ref<const Vector>& targets,
                              const Eigen::Ref<const Matrix>& bias,
                              Eigen::Ref<Matrix> states) const {
  Matrix work = bias;
  smooth_rows(regressors, targets, Eigen::Map<Matrix>(work.data(), 1, work.size()));
  states = work;
}

void SmootherSchedule::smooth_rows(const Matrix& regressors,
                                   const Eigen::Ref<const Matrix>& targets,
                                   Eigen::Ref<Matrix> states) const {
  const Index steps_count = steps();
  const Index width = this->width();
  const Index m = targets.cols();
  Matrix innovation(m, steps_count);
  Matrix pred(m, width);

  // Forward filter, overwriting mu_t with the filtered mean a^{t|t}.
  for (Index t = 0; t < steps_count; ++t) {
    const Index c0 = t * width;
    for (Index k = 0; k < width; ++k) {
      for (Index i = 0; i < m; ++i) {
        pred(i, k) = (t > 0 ? states(i, c0 - width + k) : 0.0) + states(i, c0 + k);
      }
    }
    for (Index i = 0; i < m; ++i) innovation(i, t) = targets(t, i);
    for (Index k = 0; k < width; ++k) {
      const double xk = regressors(t, k);
      for (Index i = 0; i < m; ++i) innovation(i, t) -= pred(i, k) * xk;
    }
    for (Index k = 0; k < width; ++k) {
      const double gk = gains_(k, t);
      for (Index i = 0; i < m; ++i) states(i, c0 + k) = pred(i, k) + innovation(i, t) * gk;
    }
  }

  // Rauch-Tung-Striebel backward pass: a^t += C^t (a^{t+1} - a^{t+1|t}), where
  // a^{t+1} - a^{t+1|t} = (a^{t+1} - a^{t+1|t+1}) + K^{t+1} e_{t+1}.
  Matrix delta = Matrix::Zero(m, width);
  Matrix correction(m, width);
  for (Index t = steps_count - 2; t >= 0; --t) {
    const Index c0 = t * width;
    for (Index l = 0; l < width; ++l) {
      const double gl = gains_(l, t + 1);
      for (Index i = 0; i < m; ++i) correction(i, l) = delta(i, l) + innovation(i, t + 1) * gl;
    }
    delta.setZero();
    for (Index l = 0; l < width; ++l) {
      for (Index k = 0; k < width; ++k) {
        const double c = smoother_gains_(k, c0 + l);
        for (Index i = 0; i < m; ++i) delta(i, k) += correction(i, l) * c;
      }
    }
    for (Index k = 0; k < width; ++k) {
      for (Index i = 0; i < m; ++i) states(i, c0 + k) += delta(i, k);
    }
  }
}

SmoothedRow smooth_row(const RowSmoothingProblem& problem, bool keep_covariances) {
  problem.validate();
  const SmootherSchedule schedule(problem.regressors, problem.rho, keep_covariances);
  SmoothedRow out;
  out.states.resize(problem.width(), problem.steps());
  schedule.smooth(problem.regressors, problem.targets, problem.bias, out.states);
  if (keep_covariances) out.covariances = schedule.smoothed_covariances();
  return out;
}

double row_objective(const RowSmoothingProblem& problem, const Matrix& states) {
  double fit = 0.0;
  double fusion = 0.0;
  for (Index t = 0; t < problem.steps(); ++t) {
    const double r = problem.targets(t) - problem.regressors.row(t).dot(states.col(t));
    fit += r * r;
    Vector step = states.col(t) - problem.bias.col(t);
    if (t > 0) step -= states.col(t - 1);
    fusion += step.squaredNorm();
  }
  return fit + 0.5 * problem.rho * fusion;
}

}  // namespace tsbreak::kalman
