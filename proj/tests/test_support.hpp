#ifndef TSBREAK_TEST_SUPPORT_HPP
#define TSBREAK_TEST_SUPPORT_HPP

#include "tsbreak/core.hpp"
#include "tsbreak/kalman.hpp"

#include <random>

namespace tsbreak::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  }
  return m;
}

inline TimeSeries random_series(std::mt19937_64& rng, Index n, Index p) {
  return TimeSeries(random_matrix(rng, n, p));
}

inline DiffPath random_diff(std::mt19937_64& rng, Index p, Index lag, Index steps, double sd = 1.0) {
  return DiffPath(lag, random_matrix(rng, p, p * lag * steps, sd));
}

inline kalman::RowSmoothingProblem random_row_problem(std::mt19937_64& rng, Index width,
                                                      Index steps, double rho) {
  kalman::RowSmoothingProblem problem;
  problem.targets = random_matrix(rng, steps, 1);
  problem.regressors = random_matrix(rng, steps, width);
  problem.bias = random_matrix(rng, width, steps, 0.3);
  problem.rho = rho;
  return problem;
}

/// Central finite-difference gradient of the row objective.
inline Matrix fd_row_gradient(const kalman::RowSmoothingProblem& problem, const Matrix& states,
                              double h = 1e-5) {
  Matrix grad(states.rows(), states.cols());
  Matrix probe = states;
  for (Index c = 0; c < states.cols(); ++c) {
    for (Index r = 0; r < states.rows(); ++r) {
      probe(r, c) = states(r, c) + h;
      const double up = kalman::row_objective(problem, probe);
      probe(r, c) = states(r, c) - h;
      const double down = kalman::row_objective(problem, probe);
      probe(r, c) = states(r, c);
      grad(r, c) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace tsbreak::testing

#endif  // TSBREAK_TEST_SUPPORT_HPP
