#ifndef TSBREAK_ORACLE_HPP
#define TSBREAK_ORACLE_HPP

#include "tsbreak/core.hpp"

/// Slow, dense reference solvers for verification. They share only the core
/// data types with the production path.
namespace tsbreak::oracle {

/// Largest total variable count p * pK * T accepted by the dense solvers.
inline constexpr Index kDenseLimit = 5000;

/// Cumulative design: row t holds xtilde_t^T in every block column s <= t.
/// Shape T x (pK T).
Matrix cumulative_design(const LaggedDesign& design);

/// ||Y - X theta||_F^2 + lambda sum_{t>=2} ||theta^t||_F with X dense.
double reparam_objective(const LaggedDesign& design, const DiffPath& theta, double lambda);

/// ||Y - X theta||_F^2 + rho/2 ||theta - W + Omega||_F^2.
double global_objective(const LaggedDesign& design, const DiffPath& theta, const DiffPath& w,
                        const DiffPath& omega, double rho);

/// Minimizer of global_objective over theta, from one dense normal-equations
/// solve over all p * pK * T coefficients in the A-parameterization.
DiffPath dense_global_solve(const LaggedDesign& design, const DiffPath& w,
                            const DiffPath& omega, double rho);

struct ReferenceResult {
  DiffPath theta;
  double objective = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Accelerated proximal gradient (FISTA with function-value restart) on the
/// group lasso form, step 1/L with L = 2 lambda_max(X^T X). Stops once the
/// relative objective change of an accepted step is <= tol.
ReferenceResult proximal_gradient_reference(const LaggedDesign& design, double lambda,
                                            double tol = 1e-14, Index max_iter = 2000000);

/// min_theta ||Y - X theta||^2 via a dense solve with a 1e-10 ridge.
double dense_least_squares_objective(const LaggedDesign& design);

}  // namespace tsbreak::oracle

#endif  // TSBREAK_ORACLE_HPP
