#include "tsbreak/kalman.hpp"

#include <sstream>

namespace tsbreak::kalman {

// Stacks z = (a^1, ..., a^T) and solves H z = b with
//   H = 2 blockdiag(xtilde_t xtilde_t^T) + rho D^T D,
//   b = 2 (x_tj xtilde_t)_t + rho D^T mu,
// where D is the first-difference operator with a^0 = 0.
SmoothedRow dense_row_solve(const RowSmoothingProblem& problem) {
  problem.validate();
  const Index steps_count = problem.steps();
  const Index width = problem.width();
  const Index n = steps_count * width;
  if (n > kDenseRowLimit) {
    std::ostringstream msg;
    msg << "dense_row_solve: T*pK = " << n << " exceeds the dense limit " << kDenseRowLimit;
    throw LengthError(msg.str());
  }

  Matrix diff = Matrix::Identity(n, n);
  for (Index t = 1; t < steps_count; ++t) {
    diff.block(t * width, (t - 1) * width, width, width) = -Matrix::Identity(width, width);
  }

  Matrix hessian = problem.rho * diff.transpose() * diff;
  Vector mu(n);
  Vector rhs = Vector::Zero(n);
  for (Index t = 0; t < steps_count; ++t) {
    const Vector x = problem.regressors.row(t).transpose();
    hessian.block(t * width, t * width, width, width) += 2.0 * x * x.transpose();
    rhs.segment(t * width, width) += 2.0 * problem.targets(t) * x;
    mu.segment(t * width, width) = problem.bias.col(t);
  }
  rhs += problem.rho * diff.transpose() * mu;

  const Eigen::LDLT<Matrix> ldlt(hessian);
  if (ldlt.info() != Eigen::Success) {
    throw SolverError("dense_row_solve: factorization failed");
  }
  const Vector z = ldlt.solve(rhs);

  SmoothedRow out;
  out.states = Eigen::Map<const Matrix>(z.data(), width, steps_count);
  return out;
}

}  // namespace tsbreak::kalman
