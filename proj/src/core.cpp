#include "tsbreak/core.hpp"

#include <cmath>
#include <sstream>

namespace tsbreak {

TimeSeries::TimeSeries(Matrix data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.cols() == 0) {
    throw DimensionError("TimeSeries: need at least one observation and one variable");
  }
  for (Index c = 0; c < data_.cols(); ++c) {
    for (Index r = 0; r < data_.rows(); ++r) {
      if (!std::isfinite(data_(r, c))) {
        std::ostringstream msg;
        msg << "TimeSeries: non-finite value at row " << r + 1 << ", column " << c + 1;
        throw DimensionError(msg.str());
      }
    }
  }
}

void SolverConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& rule) {
    throw ConfigError("config." + field + ": " + rule);
  };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda", "must be finite and >= 0");
  if (!(rho > 0.0) || !std::isfinite(rho)) fail("rho", "must be finite and > 0");
  if (lag < 1) fail("lag", "must be >= 1");
  if (!(eps_abs > 0.0)) fail("eps_abs", "must be > 0");
  if (!(eps_rel > 0.0)) fail("eps_rel", "must be > 0");
  if (max_iter < 1) fail("max_iter", "must be >= 1");
  if (!(detect_threshold > 0.0)) fail("detect_threshold", "must be > 0");
}

LaggedDesign build_lagged_design(const TimeSeries& series, Index lag) {
  const Index n = series.n_times();
  const Index p = series.dim();
  if (lag < 1) {
    throw LengthError("build_lagged_design: lag must be >= 1");
  }
  if (n < lag + 2) {
    std::ostringstream msg;
    msg << "build_lagged_design: series of length N=" << n << " is too short for lag K=" << lag
        << " (need N >= K + 2)";
    throw LengthError(msg.str());
  }

  const Index rows = n - lag;
  LaggedDesign design;
  design.lag = lag;
  design.t_offset = lag;
  design.targets = series.data().bottomRows(rows);
  design.lags.resize(rows, p * lag);
  for (Index r = 0; r < rows; ++r) {
    const Index t = r + lag;  // 0-based row of the target in the series
    for (Index k = 1; k <= lag; ++k) {
      design.lags.row(r).segment((k - 1) * p, p) = series.data().row(t - k);
    }
  }
  return design;
}

double residual_sum_of_squares(const CoefficientPath& path, const LaggedDesign& design) {
  if (path.steps() != design.rows() || path.dim() != design.dim() ||
      path.width() != design.width()) {
    std::ostringstream msg;
    msg << "objective: path has " << path.steps() << " blocks of " << path.dim() << "x"
        << path.width() << " but design has " << design.rows() << " rows of width "
        << design.width() << " and " << design.dim() << " targets";
    throw DimensionError(msg.str());
  }
  double rss = 0.0;
  for (Index t = 0; t < design.rows(); ++t) {
    rss += (design.targets.row(t).transpose() - path.block(t) * design.lags.row(t).transpose())
               .squaredNorm();
  }
  return rss;
}

double objective(const CoefficientPath& path, const LaggedDesign& design, double lambda) {
  double value = residual_sum_of_squares(path, design);
  if (lambda != 0.0) {
    double penalty = 0.0;
    for (Index t = 1; t < path.steps(); ++t) {
      penalty += (path.block(t) - path.block(t - 1)).norm();
    }
    value += lambda * penalty;
  }
  return value;
}

double objective(const DiffPath& diff, const LaggedDesign& design, double lambda) {
  return objective(diff_to_coeff(diff), design, lambda);
}

CoefficientPath diff_to_coeff(const DiffPath& diff) {
  CoefficientPath path(diff.lag(), diff.stacked());
  for (Index t = 1; t < path.steps(); ++t) {
    path.block(t) += path.block(t - 1);
  }
  return path;
}

DiffPath coeff_to_diff(const CoefficientPath& path) {
  DiffPath diff(path.lag(), path.stacked());
  for (Index t = path.steps() - 1; t >= 1; --t) {
    diff.block(t) -= path.block(t - 1);
  }
  return diff;
}

std::vector<double> block_norms(const DiffPath& diff) {
  std::vector<double> norms(static_cast<std::size_t>(diff.steps()));
  for (Index t = 0; t < diff.steps(); ++t) {
    norms[static_cast<std::size_t>(t)] = diff.block(t).norm();
  }
  return norms;
}

}  // namespace tsbreak
