#include "tsbreak/simulate.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace tsbreak;
using simulate::BreakVarSpec;

namespace {

// Power iteration on the companion matrix; valid when the dominant eigenvalue
// is real and separated from the rest.
double power_radius(const Matrix& coeffs, int iterations) {
  const Matrix c = simulate::companion(coeffs);
  Vector v = Vector::Ones(c.rows());
  double estimate = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const Vector next = c * v;
    estimate = next.norm() / v.norm();
    v = next / next.norm();
  }
  return estimate;
}

BreakVarSpec scalar_spec(double a, Index n) {
  BreakVarSpec spec;
  spec.dim = 1;
  spec.lag = 1;
  spec.n_times = n;
  spec.segment_coeffs = {Matrix::Constant(1, 1, a)};
  spec.noise_sd = 0.0;
  spec.burn_in = 0;
  return spec;
}

}  // namespace

TEST_CASE("spectral radius examples") {
  CHECK(simulate::spectral_radius(0.5 * Matrix::Identity(3, 3)) == doctest::Approx(0.5));
  CHECK(simulate::spectral_radius(Matrix::Zero(2, 4)) == 0.0);
  Matrix ar2(1, 2);
  ar2 << 0.5, 0.24;  // roots of z^2 - 0.5 z - 0.24: 0.8 and -0.3
  CHECK(simulate::spectral_radius(ar2) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("companion layout") {
  Matrix a(2, 4);
  a << 1, 2, 3, 4, 5, 6, 7, 8;
  const Matrix c = simulate::companion(a);
  CHECK(c.topRows(2) == a);
  CHECK(c.bottomLeftCorner(2, 2) == Matrix::Identity(2, 2));
  CHECK(c.bottomRightCorner(2, 2).isZero(0.0));
}

TEST_CASE("spectral radius agrees with power iteration") {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int trial = 0; trial < 400 && compared < 10; ++trial) {
    const Matrix a = testing::random_matrix(rng, 3, 6, 0.4);
    const Eigen::EigenSolver<Matrix> eig(simulate::companion(a), false);
    const Eigen::VectorXcd ev = eig.eigenvalues();
    Index lead = 0;
    ev.cwiseAbs().maxCoeff(&lead);
    if (std::abs(ev(lead).imag()) > 1e-12) continue;
    double second = 0.0;
    for (Index i = 0; i < ev.size(); ++i) {
      if (i != lead) second = std::max(second, std::abs(ev(i)));
    }
    if (second / std::abs(ev(lead)) > 0.8) continue;
    CHECK(simulate::spectral_radius(a) == doctest::Approx(power_radius(a, 400)).epsilon(1e-8));
    ++compared;
  }
  CHECK(compared == 10);
}

TEST_CASE("random_stable_var is stable and deterministic") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = simulate::random_stable_var(4, 2, 0.9, seed);
    CHECK(simulate::spectral_radius(a) < 0.9);
    CHECK(a == simulate::random_stable_var(4, 2, 0.9, seed));
  }
  CHECK(simulate::random_stable_var(4, 2, 0.9, 1) != simulate::random_stable_var(4, 2, 0.9, 2));
  CHECK_THROWS_AS(simulate::random_stable_var(2, 1, 1.0, 0), ConfigError);
}

TEST_CASE("zero coefficients and zero noise give a zero series") {
  BreakVarSpec spec = scalar_spec(0.0, 25);
  spec.dim = 3;
  spec.segment_coeffs = {Matrix::Zero(3, 3)};
  CHECK(simulate::simulate_break_var(spec).data().isZero(0.0));
}

TEST_CASE("noise-free AR(1) decays geometrically from the initial state") {
  BreakVarSpec spec = scalar_spec(0.5, 30);
  spec.initial_state = Matrix::Constant(1, 1, 1.0);
  const Matrix x = simulate::simulate_break_var(spec).data();
  for (Index t = 1; t <= 30; ++t) {
    CHECK(x(t - 1, 0) == doctest::Approx(std::pow(0.5, static_cast<double>(t))).epsilon(1e-15));
  }
}

TEST_CASE("regimes switch after each break time") {
  BreakVarSpec spec = scalar_spec(0.5, 10);
  spec.break_times = {4};
  spec.segment_coeffs = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, -0.5)};
  spec.initial_state = Matrix::Constant(1, 1, 1.0);
  const Matrix x = simulate::simulate_break_var(spec).data();
  CHECK(x(3, 0) == doctest::Approx(0.0625));
  CHECK(x(4, 0) == doctest::Approx(-0.03125));
  CHECK(x(5, 0) == doctest::Approx(0.015625));
}

TEST_CASE("same seed gives bit-identical output") {
  const BreakVarSpec spec = simulate::random_break_spec(10, 1, 300, {100, 200}, 2024);
  const Matrix a = simulate::simulate_break_var(spec).data();
  const Matrix b = simulate::simulate_break_var(simulate::random_break_spec(10, 1, 300, {100, 200}, 2024)).data();
  CHECK(a == b);
  BreakVarSpec other = spec;
  other.seed = 2025;
  CHECK(simulate::simulate_break_var(other).data() != a);
}

TEST_CASE("random_break_spec at the benchmark size") {
  const BreakVarSpec spec = simulate::random_break_spec(10, 1, 300, {100, 200}, 5);
  REQUIRE(spec.segment_coeffs.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(spec.segment_coeffs[i].rows() == 10);
    CHECK(spec.segment_coeffs[i].cols() == 10);
    CHECK(simulate::spectral_radius(spec.segment_coeffs[i]) < 0.9);
    if (i > 0) CHECK((spec.segment_coeffs[i] - spec.segment_coeffs[i - 1]).norm() >= 0.5);
  }
  const TimeSeries s = simulate::simulate_break_var(spec);
  CHECK(s.n_times() == 300);
  CHECK(s.dim() == 10);
}

TEST_CASE("spec validation names the field") {
  BreakVarSpec spec = scalar_spec(0.5, 20);
  CHECK_NOTHROW(spec.validate());

  BreakVarSpec bad = spec;
  bad.segment_coeffs = {Matrix::Constant(1, 1, 1.0)};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("segment_coeffs[0]"), ConfigError);

  bad = spec;
  bad.break_times = {10};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("segment_coeffs"), ConfigError);

  bad = spec;
  bad.break_times = {20};
  bad.segment_coeffs.push_back(bad.segment_coeffs[0]);
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("break_times[0]"), ConfigError);

  bad = spec;
  bad.break_times = {10, 8};
  bad.segment_coeffs.assign(3, bad.segment_coeffs[0]);
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("break_times[1]"), ConfigError);

  bad = spec;
  bad.noise_sd = -1.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("noise_sd"), ConfigError);

  bad = spec;
  bad.initial_state = Matrix::Zero(2, 1);
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("initial_state"), ConfigError);

  bad = spec;
  bad.n_times = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("within-regime least squares recovers coefficients as the noise vanishes") {
  auto ols_error = [](double noise_sd) {
    BreakVarSpec spec;
    spec.dim = 3;
    spec.lag = 1;
    spec.n_times = 200;
    spec.segment_coeffs = {simulate::random_stable_var(3, 1, 0.9, 77)};
    spec.noise_sd = noise_sd;
    spec.burn_in = 0;
    spec.seed = 3;
    spec.initial_state = (Matrix(1, 3) << 1e3, -5e2, 8e2).finished();
    const TimeSeries s = simulate::simulate_break_var(spec);
    const LaggedDesign d = build_lagged_design(s, 1);
    const Matrix est = d.lags.colPivHouseholderQr().solve(d.targets).transpose();
    return (est - spec.segment_coeffs[0]).cwiseAbs().maxCoeff();
  };
  const double at_1e6 = ols_error(1e-6);
  CHECK(at_1e6 <= 1e-8);
  const double at_1e4 = ols_error(1e-4);
  CHECK(at_1e4 / at_1e6 == doctest::Approx(100.0).epsilon(0.01));
}
