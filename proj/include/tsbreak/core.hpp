#ifndef TSBREAK_CORE_HPP
#define TSBREAK_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/// Change-point segmentation of vector autoregressive series via the group
/// fused lasso.
///
/// Time conventions used throughout:
///   - original time runs 1..N over the observations x_1..x_N;
///   - the first K observations only serve as lags, so coefficient paths are
///     indexed by step t = 1..T (T = N - K), step t covering original time
///     t + K;
///   - difference blocks are theta^1 = A^1 and theta^t = A^t - A^{t-1}.
namespace tsbreak {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Errors ---------------------------------------------------------------------

/// Series too short for the requested lag order (or similar length rule).
class LengthError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two objects that must agree in shape do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration or model specification.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside a solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data -----------------------------------------------------------------------

/// N x p matrix of observations; row t-1 holds x_t.
class TimeSeries {
 public:
  TimeSeries() = default;
  explicit TimeSeries(Matrix data);

  const Matrix& data() const { return data_; }
  Index n_times() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }

 private:
  Matrix data_;
};

/// Stacked lag regressors for every usable time step.
///
/// Row t (0-based) of `lags` is the lag vector for original time
/// t + t_offset + 1, with the most recent lag first:
/// (x_{s-1}^T, ..., x_{s-K}^T).
struct LaggedDesign {
  Matrix lags;     // T x pK
  Matrix targets;  // T x p
  Index t_offset = 0;
  Index lag = 0;

  Index rows() const { return lags.rows(); }
  Index dim() const { return targets.cols(); }
  Index width() const { return lags.cols(); }
};

/// Sequence of T blocks of size p x pK stored side by side in one p x (pK*T)
/// matrix. The tag separates the A-parameterization from difference blocks.
template <class Tag>
class BlockPath {
 public:
  BlockPath() = default;

  BlockPath(Index dim, Index lag, Index steps)
      : lag_(lag), stacked_(Matrix::Zero(dim, dim * lag * steps)) {
    if (dim <= 0 || lag <= 0 || steps < 0) {
      throw DimensionError("BlockPath: dim and lag must be positive");
    }
  }

  BlockPath(Index lag, Matrix stacked) : lag_(lag), stacked_(std::move(stacked)) {
    const Index width = stacked_.rows() * lag_;
    if (lag_ <= 0 || stacked_.rows() <= 0 || stacked_.cols() % width != 0) {
      throw DimensionError("BlockPath: stacked matrix is not a whole number of p x pK blocks");
    }
  }

  Index dim() const { return stacked_.rows(); }
  Index lag() const { return lag_; }
  Index width() const { return stacked_.rows() * lag_; }
  Index steps() const { return width() == 0 ? 0 : stacked_.cols() / width(); }

  /// Block for step t, 0-based.
  auto block(Index t) { return stacked_.middleCols(t * width(), width()); }
  auto block(Index t) const { return stacked_.middleCols(t * width(), width()); }

  const Matrix& stacked() const { return stacked_; }
  Matrix& stacked() { return stacked_; }

  bool same_shape(const BlockPath& other) const {
    return lag_ == other.lag_ && stacked_.rows() == other.stacked_.rows() &&
           stacked_.cols() == other.stacked_.cols();
  }

 private:
  Index lag_ = 0;
  Matrix stacked_;
};

struct CoefficientTag {};
struct DiffTag {};

/// A^1..A^T, each p x pK with the lag-1 block leftmost.
using CoefficientPath = BlockPath<CoefficientTag>;
/// theta^1..theta^T; also the shape of the ADMM split variable W and the
/// scaled dual Omega.
using DiffPath = BlockPath<DiffTag>;

struct SolverConfig {
  double lambda = 1.0;
  double rho = 1.0;
  Index lag = 1;
  double eps_abs = 1e-6;
  double eps_rel = 1e-4;
  Index max_iter = 5000;
  double detect_threshold = 0.005;
  std::optional<std::uint64_t> seed;
  /// Residual-balancing rho updates (x2 / /2 when one residual exceeds the
  /// other tenfold).
  bool adaptive_rho = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Least-squares fit of one detected segment. Times are original 1-based.
struct SegmentFit {
  Index start = 0;
  Index end = 0;
  /// Regression rows (targets whose lags all fall inside the segment).
  Index rows = 0;
  /// OLS coefficients, p x pK; empty when the segment is too short.
  std::optional<Matrix> coeffs;
  /// Mean of the fused path A^t over the segment's steps.
  std::optional<Matrix> fused;
  std::string warning;
};

struct SegmentationResult {
  std::vector<Index> breakpoints;
  std::vector<SegmentFit> segments;
  DiffPath theta_path;
  Index iterations = 0;
  bool converged = false;
  std::vector<double> primal_residuals;
  std::vector<double> dual_residuals;
  double objective = 0.0;
};

// Operations -----------------------------------------------------------------

/// Throws LengthError unless N >= K + 2.
LaggedDesign build_lagged_design(const TimeSeries& series, Index lag);

/// sum_t ||x_t - A^t xtilde_t||^2 + lambda * sum_{t>=2} ||A^t - A^{t-1}||_F
double objective(const CoefficientPath& path, const LaggedDesign& design, double lambda);

/// Same objective with the path given as difference blocks.
double objective(const DiffPath& diff, const LaggedDesign& design, double lambda);

/// Sum of squared regression residuals only.
double residual_sum_of_squares(const CoefficientPath& path, const LaggedDesign& design);

CoefficientPath diff_to_coeff(const DiffPath& diff);
DiffPath coeff_to_diff(const CoefficientPath& path);

/// Frobenius norm of every block.
std::vector<double> block_norms(const DiffPath& diff);

}  // namespace tsbreak

#endif  // TSBREAK_CORE_HPP
