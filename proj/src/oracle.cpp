#include "tsbreak/oracle.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace tsbreak::oracle {

namespace {

void guard(const LaggedDesign& design, const char* where) {
  const Index n = design.dim() * design.width() * design.rows();
  if (n > kDenseLimit) {
    std::ostringstream msg;
    msg << where << ": " << n << " variables exceeds the dense limit " << kDenseLimit;
    throw LengthError(msg.str());
  }
}

// theta stacked as (pK T) x p, block row s = (theta^s)^T.
Matrix as_columns(const DiffPath& theta) { return theta.stacked().transpose(); }

double penalty(const Matrix& theta_cols, Index width) {
  double sum = 0.0;
  for (Index s = 1; s * width < theta_cols.rows(); ++s) {
    sum += theta_cols.middleRows(s * width, width).norm();
  }
  return sum;
}

}  // namespace

Matrix cumulative_design(const LaggedDesign& design) {
  const Index steps = design.rows();
  const Index width = design.width();
  Matrix x = Matrix::Zero(steps, width * steps);
  for (Index t = 0; t < steps; ++t) {
    for (Index s = 0; s <= t; ++s) {
      x.block(t, s * width, 1, width) = design.lags.row(t);
    }
  }
  return x;
}

double reparam_objective(const LaggedDesign& design, const DiffPath& theta, double lambda) {
  guard(design, "reparam_objective");
  const Matrix cols = as_columns(theta);
  const double fit = (design.targets - cumulative_design(design) * cols).squaredNorm();
  return fit + lambda * penalty(cols, design.width());
}

double global_objective(const LaggedDesign& design, const DiffPath& theta, const DiffPath& w,
                        const DiffPath& omega, double rho) {
  guard(design, "global_objective");
  const Matrix cols = as_columns(theta);
  const double fit = (design.targets - cumulative_design(design) * cols).squaredNorm();
  return fit + 0.5 * rho * (theta.stacked() - w.stacked() + omega.stacked()).squaredNorm();
}

DiffPath dense_global_solve(const LaggedDesign& design, const DiffPath& w,
                            const DiffPath& omega, double rho) {
  guard(design, "dense_global_solve");
  const Index p = design.dim();
  const Index width = design.width();
  const Index steps = design.rows();
  const Index per_row = width * steps;
  const Index n = p * per_row;
  if (w.stacked().rows() != p || w.stacked().cols() != per_row ||
      omega.stacked().rows() != p || omega.stacked().cols() != per_row) {
    throw DimensionError("dense_global_solve: W/Omega shape does not match the design");
  }

  // Variable (j, t, i) -> j * per_row + t * width + i, holding A^t(j, i).
  // Fusion term rho/2 sum_t ||A^t - A^{t-1} - mu^t||^2 with A^0 = 0.
  Matrix hessian = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  const Matrix mu = w.stacked() - omega.stacked();
  for (Index j = 0; j < p; ++j) {
    const Index base = j * per_row;
    for (Index t = 0; t < steps; ++t) {
      const Index at = base + t * width;
      const Vector x = design.lags.row(t).transpose();
      hessian.block(at, at, width, width) += 2.0 * x * x.transpose();
      rhs.segment(at, width) += 2.0 * design.targets(t, j) * x;

      const Vector m = mu.row(j).segment(t * width, width).transpose();
      for (Index i = 0; i < width; ++i) {
        hessian(at + i, at + i) += rho;
        rhs(at + i) += rho * m(i);
        if (t > 0) {
          const Index prev = at - width + i;
          hessian(prev, prev) += rho;
          hessian(at + i, prev) -= rho;
          hessian(prev, at + i) -= rho;
          rhs(prev) -= rho * m(i);
        }
      }
    }
  }

  const Eigen::LLT<Matrix> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw SolverError("dense_global_solve: Hessian is not positive definite");
  }
  const Vector a = llt.solve(rhs);

  Matrix stacked(p, per_row);
  for (Index j = 0; j < p; ++j) {
    for (Index t = 0; t < steps; ++t) {
      for (Index i = 0; i < width; ++i) {
        const double cur = a(j * per_row + t * width + i);
        const double prev = t > 0 ? a(j * per_row + (t - 1) * width + i) : 0.0;
        stacked(j, t * width + i) = cur - prev;
      }
    }
  }
  return DiffPath(design.lag, std::move(stacked));
}

ReferenceResult proximal_gradient_reference(const LaggedDesign& design, double lambda,
                                            double tol, Index max_iter) {
  guard(design, "proximal_gradient_reference");
  const Index width = design.width();
  const Matrix x = cumulative_design(design);
  const Matrix gram = x.transpose() * x;
  const Matrix xty = x.transpose() * design.targets;
  const double y_sq = design.targets.squaredNorm();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * eig.eigenvalues().maxCoeff();
  const double step = 1.0 / lipschitz;
  const double kappa = lambda * step;

  // ||Y - X Th||^2 = tr(Th^T G Th) - 2 tr(Th^T X^T Y) + ||Y||^2
  auto value = [&](const Matrix& th) {
    const double fit = (th.transpose() * gram * th).trace() - 2.0 * (th.cwiseProduct(xty)).sum() + y_sq;
    return std::max(fit, 0.0) + lambda * penalty(th, width);
  };
  auto prox = [&](Matrix v) {
    for (Index s = 1; s * width < v.rows(); ++s) {
      auto blk = v.middleRows(s * width, width);
      const double norm = blk.norm();
      if (norm <= kappa) {
        blk.setZero();
      } else {
        blk *= 1.0 - kappa / norm;
      }
    }
    return v;
  };

  Matrix theta = Matrix::Zero(x.cols(), design.dim());
  Matrix extrap = theta;
  double momentum = 1.0;
  double f_prev = value(theta);

  ReferenceResult out;
  for (Index iter = 1; iter <= max_iter; ++iter) {
    out.iterations = iter;
    const Matrix grad = 2.0 * (gram * extrap - xty);
    Matrix next = prox(extrap - step * grad);
    const double f_next = value(next);
    if (f_next > f_prev) {
      // Function-value restart: drop momentum and retry from theta.
      if (momentum == 1.0) {
        out.converged = true;
        break;
      }
      momentum = 1.0;
      extrap = theta;
      continue;
    }
    const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    extrap = next + ((momentum - 1.0) / momentum_next) * (next - theta);
    momentum = momentum_next;
    theta = std::move(next);
    const double change = f_prev - f_next;
    f_prev = f_next;
    if (change <= tol * std::max(1.0, std::abs(f_next))) {
      out.converged = true;
      break;
    }
  }

  out.theta = DiffPath(design.lag, Matrix(theta.transpose()));
  out.objective = reparam_objective(design, out.theta, lambda);
  return out;
}

double dense_least_squares_objective(const LaggedDesign& design) {
  guard(design, "dense_least_squares_objective");
  const Matrix x = cumulative_design(design);
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += 1e-10;
  const Matrix theta = gram.ldlt().solve(x.transpose() * design.targets);
  return (design.targets - x * theta).squaredNorm();
}

}  // namespace tsbreak::oracle
