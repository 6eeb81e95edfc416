#include "tsbreak/oracle.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace tsbreak;

namespace {

LaggedDesign random_design(std::mt19937_64& rng, Index p, Index lag, Index steps) {
  return build_lagged_design(testing::random_series(rng, steps + lag, p), lag);
}

}  // namespace

TEST_CASE("cumulative design is lower block triangular") {
  std::mt19937_64 rng(1);
  const LaggedDesign d = random_design(rng, 2, 1, 4);
  const Matrix x = oracle::cumulative_design(d);
  REQUIRE(x.rows() == 4);
  REQUIRE(x.cols() == 8);
  for (Index t = 0; t < 4; ++t) {
    for (Index s = 0; s < 4; ++s) {
      const Matrix blk = x.block(t, 2 * s, 1, 2);
      if (s <= t) {
        CHECK(blk == d.lags.row(t));
      } else {
        CHECK(blk.isZero(0.0));
      }
    }
  }
}

TEST_CASE("reparam_objective agrees with the A-parameterized objective") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const LaggedDesign d = random_design(rng, 2, 1 + trial % 2, 8);
    const DiffPath theta = testing::random_diff(rng, 2, d.lag, 8);
    CHECK(oracle::reparam_objective(d, theta, 1.7) ==
          doctest::Approx(objective(theta, d, 1.7)).epsilon(1e-12));
  }
}

TEST_CASE("dense_global_solve: zero input and exact optimality") {
  std::mt19937_64 rng(3);
  const LaggedDesign zero_design = build_lagged_design(TimeSeries(Matrix::Zero(10, 2)), 1);
  const DiffPath zero(2, 1, 9);
  CHECK(oracle::dense_global_solve(zero_design, zero, zero, 1.0).stacked().isZero(0.0));

  const LaggedDesign d = random_design(rng, 2, 1, 7);
  const DiffPath w = testing::random_diff(rng, 2, 1, 7, 0.3);
  const DiffPath omega = testing::random_diff(rng, 2, 1, 7, 0.3);
  const double rho = 2.0;
  const DiffPath theta = oracle::dense_global_solve(d, w, omega, rho);

  // Gradient in theta: -2 X^T (Y - X theta) + rho (theta - W + Omega).
  const Matrix x = oracle::cumulative_design(d);
  const Matrix cols = theta.stacked().transpose();
  const Matrix grad = -2.0 * x.transpose() * (d.targets - x * cols) +
                      rho * (theta.stacked() - w.stacked() + omega.stacked()).transpose();
  CHECK(grad.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("dense solvers enforce the size guard") {
  std::mt19937_64 rng(4);
  const LaggedDesign d = random_design(rng, 5, 2, 60);  // 5 * 10 * 60 = 3000 ok
  const LaggedDesign big = random_design(rng, 5, 2, 120);  // 6000 > 5000
  const DiffPath w(5, 2, 120);
  CHECK_THROWS_AS(oracle::dense_global_solve(big, w, w, 1.0), LengthError);
  CHECK_THROWS_AS(oracle::proximal_gradient_reference(big, 1.0), LengthError);
  CHECK(d.rows() == 60);
}

TEST_CASE("proximal gradient reference: smooth case matches dense least squares") {
  std::mt19937_64 rng(5);
  const LaggedDesign d = random_design(rng, 2, 1, 12);
  const oracle::ReferenceResult ref = oracle::proximal_gradient_reference(d, 0.0);
  CHECK(ref.converged);
  CHECK(std::abs(ref.objective - oracle::dense_least_squares_objective(d)) <= 1e-8);
}

TEST_CASE("proximal gradient reference: huge lambda zeroes every difference block") {
  std::mt19937_64 rng(6);
  const LaggedDesign d = random_design(rng, 2, 1, 15);
  const oracle::ReferenceResult ref = oracle::proximal_gradient_reference(d, 1e6);
  CHECK(ref.converged);
  for (Index t = 1; t < ref.theta.steps(); ++t) CHECK(ref.theta.block(t).isZero(0.0));
  // Remaining block is the whole-sample OLS fit.
  const Matrix ols = d.lags.colPivHouseholderQr().solve(d.targets).transpose();
  CHECK((Matrix(ref.theta.block(0)) - ols).cwiseAbs().maxCoeff() <= 1e-6);
}
