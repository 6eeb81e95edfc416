#include "tsbreak/simulate.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace tsbreak::simulate {

namespace {

[[noreturn]] void spec_error(const std::string& field, const std::string& rule) {
  throw ConfigError("spec." + field + ": " + rule);
}

// Scaling lag block k by c^k scales every companion eigenvalue by c.
void scale_radius(Matrix& coeffs, Index lag, double factor) {
  const Index p = coeffs.rows();
  double power = 1.0;
  for (Index k = 0; k < lag; ++k) {
    power *= factor;
    coeffs.middleCols(k * p, p) *= power;
  }
}

constexpr std::uint64_t kRegimeStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

void BreakVarSpec::validate() const {
  if (dim < 1) spec_error("dim", "must be >= 1");
  if (lag < 1) spec_error("lag", "must be >= 1");
  if (n_times < 1) spec_error("n_times", "must be >= 1");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) spec_error("noise_sd", "must be finite and >= 0");
  if (burn_in < 0) spec_error("burn_in", "must be >= 0");
  for (std::size_t i = 0; i < break_times.size(); ++i) {
    const Index b = break_times[i];
    if (b <= lag || b >= n_times) {
      spec_error("break_times[" + std::to_string(i) + "]",
                 "must lie strictly inside (lag, n_times) = (" + std::to_string(lag) + ", " +
                     std::to_string(n_times) + ")");
    }
    if (i > 0 && b <= break_times[i - 1]) {
      spec_error("break_times[" + std::to_string(i) + "]", "must be strictly increasing");
    }
  }
  if (segment_coeffs.size() != break_times.size() + 1) {
    spec_error("segment_coeffs", "need one matrix per segment (" +
                                     std::to_string(break_times.size() + 1) + "), got " +
                                     std::to_string(segment_coeffs.size()));
  }
  for (std::size_t i = 0; i < segment_coeffs.size(); ++i) {
    const Matrix& a = segment_coeffs[i];
    const std::string field = "segment_coeffs[" + std::to_string(i) + "]";
    if (a.rows() != dim || a.cols() != dim * lag) {
      spec_error(field, "must be dim x dim*lag");
    }
    if (!a.allFinite()) spec_error(field, "must be finite");
    const double radius = spectral_radius(a);
    if (!(radius < 1.0)) {
      std::ostringstream msg;
      msg << "companion spectral radius " << radius << " >= 1 (regime not stationary)";
      spec_error(field, msg.str());
    }
  }
  if (initial_state && (initial_state->rows() != lag || initial_state->cols() != dim)) {
    spec_error("initial_state", "must be lag x dim");
  }
}

Matrix companion(const Matrix& coeffs) {
  const Index p = coeffs.rows();
  const Index width = coeffs.cols();
  Matrix c = Matrix::Zero(width, width);
  c.topRows(p) = coeffs;
  if (width > p) {
    c.bottomLeftCorner(width - p, width - p).setIdentity();
  }
  return c;
}

double spectral_radius(const Matrix& coeffs) {
  const Eigen::EigenSolver<Matrix> solver(companion(coeffs), false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix random_stable_var(Index dim, Index lag, double radius_cap, std::uint64_t seed) {
  if (!(radius_cap > 0.0 && radius_cap < 1.0)) {
    throw ConfigError("random_stable_var: radius_cap must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim * lag)));
  Matrix coeffs(dim, dim * lag);
  for (Index c = 0; c < coeffs.cols(); ++c) {
    for (Index r = 0; r < coeffs.rows(); ++r) coeffs(r, c) = normal(rng);
  }
  for (double radius = spectral_radius(coeffs); radius >= radius_cap;
       radius = spectral_radius(coeffs)) {
    scale_radius(coeffs, lag, 0.95 * radius_cap / radius);
  }
  return coeffs;
}

BreakVarSpec random_break_spec(Index dim, Index lag, Index n_times,
                               std::vector<Index> break_times, std::uint64_t seed,
                               const RegimeDefaults& defaults) {
  BreakVarSpec spec;
  spec.dim = dim;
  spec.lag = lag;
  spec.n_times = n_times;
  spec.break_times = std::move(break_times);
  spec.noise_sd = defaults.noise_sd;
  spec.burn_in = defaults.burn_in;
  spec.seed = seed;

  std::mt19937_64 regime_rng(seed ^ kRegimeStream);
  constexpr int kMaxAttempts = 1000;
  for (std::size_t i = 0; i <= spec.break_times.size(); ++i) {
    int attempt = 0;
    for (;; ++attempt) {
      if (attempt == kMaxAttempts) {
        throw ConfigError("random_break_spec: could not draw regimes min_regime_distance apart");
      }
      Matrix candidate = random_stable_var(dim, lag, defaults.radius_cap, regime_rng());
      if (i == 0 ||
          (candidate - spec.segment_coeffs.back()).norm() >= defaults.min_regime_distance) {
        spec.segment_coeffs.push_back(std::move(candidate));
        break;
      }
    }
  }
  spec.validate();
  return spec;
}

TimeSeries simulate_break_var(const BreakVarSpec& spec) {
  spec.validate();
  const Index p = spec.dim;
  const Index width = p * spec.lag;

  Vector lags = Vector::Zero(width);
  if (spec.initial_state) {
    for (Index k = 0; k < spec.lag; ++k) {
      lags.segment(k * p, p) = spec.initial_state->row(k).transpose();
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix data(spec.n_times, p);
  Vector x(p);
  std::size_t regime = 0;
  const Index total = spec.burn_in + spec.n_times;
  for (Index step = 0; step < total; ++step) {
    const Index t = step - spec.burn_in + 1;  // original time, <= 0 during burn-in
    while (regime < spec.break_times.size() && t > spec.break_times[regime]) ++regime;

    x.noalias() = spec.segment_coeffs[regime] * lags;
    for (Index j = 0; j < p; ++j) x(j) += spec.noise_sd * normal(rng);

    if (t >= 1) data.row(t - 1) = x.transpose();
    if (width > p) {
      lags.tail(width - p) = lags.head(width - p).eval();
    }
    lags.head(p) = x;
  }
  return TimeSeries(std::move(data));
}

}  // namespace tsbreak::simulate
