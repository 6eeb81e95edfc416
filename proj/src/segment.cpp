#include "tsbreak/segment.hpp"

#include <sstream>

namespace tsbreak::segment {

std::vector<Index> detect_changepoints(const std::vector<double>& norms, Index t_offset,
                                       double threshold) {
  if (!(threshold > 0.0)) {
    throw ConfigError("detect_changepoints: threshold must be > 0");
  }
  std::vector<Index> breaks;
  for (std::size_t t = 1; t < norms.size(); ++t) {
    if (norms[t] > threshold) {
      breaks.push_back(static_cast<Index>(t) + 1 + t_offset);
    }
  }
  return breaks;
}

std::vector<Index> detect_changepoints(const DiffPath& w, double threshold) {
  return detect_changepoints(block_norms(w), w.lag(), threshold);
}

namespace {

void validate_breakpoints(const std::vector<Index>& breakpoints, Index n, Index lag) {
  Index previous = 0;
  for (std::size_t i = 0; i < breakpoints.size(); ++i) {
    const Index b = breakpoints[i];
    if (b < lag + 2 || b > n) {
      std::ostringstream msg;
      msg << "refit_segments: breakpoint " << b << " outside the usable range [" << lag + 2
          << ", " << n << "]";
      throw ConfigError(msg.str());
    }
    if (i > 0 && b <= previous) {
      throw ConfigError("refit_segments: breakpoints must be strictly increasing");
    }
    previous = b;
  }
}

}  // namespace

std::vector<SegmentFit> refit_segments(const TimeSeries& series,
                                       const std::vector<Index>& breakpoints, Index lag) {
  const Index n = series.n_times();
  const Index p = series.dim();
  const Index width = p * lag;
  validate_breakpoints(breakpoints, n, lag);
  const LaggedDesign design = build_lagged_design(series, lag);

  std::vector<SegmentFit> fits;
  fits.reserve(breakpoints.size() + 1);
  for (std::size_t i = 0; i <= breakpoints.size(); ++i) {
    SegmentFit fit;
    fit.start = i == 0 ? 1 : breakpoints[i - 1];
    fit.end = i == breakpoints.size() ? n : breakpoints[i] - 1;
    const Index first_target = fit.start + lag;  // original time
    fit.rows = std::max<Index>(0, fit.end - first_target + 1);

    if (fit.rows < width + 1) {
      std::ostringstream msg;
      msg << "segment " << i + 1 << " [" << fit.start << ", " << fit.end << "] has " << fit.rows
          << " regression rows; need at least " << width + 1;
      fit.warning = msg.str();
    } else {
      // Design row r holds target time r + lag + 1.
      const Index first_row = first_target - lag - 1;
      const auto x = design.lags.middleRows(first_row, fit.rows);
      const auto y = design.targets.middleRows(first_row, fit.rows);
      const Eigen::ColPivHouseholderQR<Matrix> qr(x);
      if (qr.rank() < width) {
        std::ostringstream msg;
        msg << "segment " << i + 1 << " [" << fit.start << ", " << fit.end
            << "] has a rank-deficient lag matrix";
        fit.warning = msg.str();
      } else {
        fit.coeffs = Matrix(qr.solve(y).transpose());
      }
    }
    fits.push_back(std::move(fit));
  }
  return fits;
}

std::vector<SegmentFit> refit_segments(const TimeSeries& series,
                                       const std::vector<Index>& breakpoints,
                                       const CoefficientPath& fused) {
  std::vector<SegmentFit> fits = refit_segments(series, breakpoints, fused.lag());
  const Index lag = fused.lag();
  if (fused.steps() != series.n_times() - lag || fused.dim() != series.dim()) {
    throw DimensionError("refit_segments: fused path does not match the series");
  }
  for (SegmentFit& fit : fits) {
    // Step t (0-based) covers original time t + lag + 1.
    const Index first = std::max(fit.start, lag + 1) - lag - 1;
    const Index last = fit.end - lag - 1;
    if (last < first) continue;
    Matrix mean = Matrix::Zero(fused.dim(), fused.width());
    for (Index t = first; t <= last; ++t) mean += fused.block(t);
    fit.fused = Matrix(mean / static_cast<double>(last - first + 1));
  }
  return fits;
}

SegmentationResult segment_series(const TimeSeries& series, const SolverConfig& config,
                                  const admm::SolveOptions& options) {
  admm::SolveResult solved = admm::solve(series, config, options);
  SegmentationResult out;
  out.breakpoints = detect_changepoints(solved.estimate, config.detect_threshold);
  out.segments = refit_segments(series, out.breakpoints, diff_to_coeff(solved.estimate));
  out.theta_path = std::move(solved.estimate);
  out.iterations = solved.state.iteration;
  out.converged = solved.converged;
  out.primal_residuals = std::move(solved.primal_residuals);
  out.dual_residuals = std::move(solved.dual_residuals);
  out.objective = solved.objective;
  return out;
}

}  // namespace tsbreak::segment
