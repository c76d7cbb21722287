#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "reference.hpp"
#include "sturm/oracle.hpp"
#include "sturm/potential.hpp"
#include "sturm/prufer.hpp"

using namespace sturm;
using std::numbers::pi;

namespace {
const Regularizer kZero = build_regularizer({0.0, 1.0, -1.0, 1.0});
const Regularizer kCoulomb = build_regularizer({1.0, 1.0, -1.0, 1.0});
const Regularizer kK14 = build_regularizer({1.0, 1.4, -1.0, 1.0});
const BoundaryConditions kDirichlet{0.0, 0.0};

// Normalized Dirichlet mismatch y(b) / |(y, y^[1])| at lambda = 400, C = 1, K = 1.
constexpr double kMismatch400 = 0.03773842926973;

double mismatch_reference(double lambda, double stepsPerUnit) {
  const auto pts = testing::graded_breakpoints(-1.0, 1.0, stepsPerUnit, 64, 1e-15);
  std::function<void(double, const std::array<double, 2>&, std::array<double, 2>&)> rhs =
      [&](double x, const std::array<double, 2>& y, std::array<double, 2>& d) {
        const double l = std::log(std::abs(x));
        const double f = -std::copysign(1.0, x) * l, F = l * l;
        d[0] = -f * y[0] + y[1];
        d[1] = (-F - lambda) * y[0] + f * y[1];
      };
  const auto y = testing::rk4_fixed<2>(rhs, {0.0, 1.0}, pts, 1e-15);
  return y[0] / std::hypot(y[0], y[1]);
}

double wrap_pi(double t) {
  double r = std::fmod(t, pi);
  if (r < 0.0) r += pi;
  return r;
}
}  // namespace

TEST_CASE("zero potential shooting") {
  const SystemState s = shoot_system(pi * pi, kZero, kDirichlet);
  CHECK(std::abs(s.y0) / std::hypot(s.y0, s.y1) <= 1e-10);
  CHECK(s.x == 1.0);
  const SystemState t = shoot_system(4.0, kZero, kDirichlet);
  // y = sin(2 (x + 1)) / 2 up to scale
  const double norm = std::hypot(t.y0, t.y1), ref = std::hypot(std::sin(4.0), 2.0 * std::cos(4.0));
  CHECK(t.y0 / norm == doctest::Approx(std::sin(4.0) / ref).epsilon(1e-10));
  CHECK(t.y1 / norm == doctest::Approx(2.0 * std::cos(4.0) / ref).epsilon(1e-10));
}

TEST_CASE("mismatch at lambda = 400 against a fixed-step reference") {
  const double coarse = mismatch_reference(400.0, 20000.0);
  const double fine = mismatch_reference(400.0, 40000.0);
  const double lib = boundary_mismatch(shoot_system(400.0, kCoulomb, kDirichlet), kCoulomb, kDirichlet);
  CHECK(std::abs(coarse - fine) <= 1e-8);
  CHECK(std::abs(lib - fine) <= 1e-8);
  CHECK(std::abs(lib - kMismatch400) <= 1e-11);
}

TEST_CASE("renormalization keeps deep negative lambda finite") {
  const SystemState s = shoot_system(-3000.0, kCoulomb, kDirichlet);
  CHECK(s.renormalizations > 0);
  CHECK(std::isfinite(s.y0));
  CHECK(std::isfinite(s.y1));
  CHECK(std::hypot(s.y0, s.y1) <= 1e6);
}

TEST_CASE("closed-form zero potential eigenvalues") {
  const EigenEstimate e0 = exact_zero_potential_eigen(0, -1.0, 1.0, kDirichlet);
  CHECK(e0.lambda == doctest::Approx(pi * pi / 4).epsilon(1e-14));
  CHECK(e0.methodTag() == "closed-form");
  CHECK(exact_zero_potential_eigen(5, -1.0, 1.0, kDirichlet).lambda == doctest::Approx(9 * pi * pi).epsilon(1e-14));
  CHECK(exact_zero_potential_eigen(3, -pi / 2, pi / 2, {0.0, pi / 2}).lambda == doctest::Approx(12.25).epsilon(1e-13));
}

TEST_CASE("oracle eigenvalues") {
  const EigenEstimate e = oracle_eigenvalue(0, kZero, kDirichlet);
  CHECK(e.lambda == doctest::Approx(pi * pi / 4).epsilon(1e-10));
  CHECK(e.methodTag() == "oracle");
  const Regularizer wide = build_regularizer({0.0, 1.0, -pi / 2, pi / 2});
  CHECK(oracle_eigenvalue(3, wide, {0.0, pi / 2}).lambda == doctest::Approx(12.25).epsilon(1e-10));
  const double o10 = oracle_eigenvalue(10, kCoulomb, kDirichlet).lambda;
  const double s10 = solve_eigenvalue(10, kCoulomb, kDirichlet).lambda;
  CHECK(std::abs(o10 - s10) <= 1e-6 * std::abs(s10));
}

TEST_CASE("oracle and Prufer solver agree for n = 0..10") {
  for (const Regularizer* reg : {&kZero, &kCoulomb, &kK14})
    for (int n = 0; n <= 10; ++n) {
      const double o = oracle_eigenvalue(n, *reg, kDirichlet).lambda;
      const double s = solve_eigenvalue(n, *reg, kDirichlet).lambda;
      CHECK(std::abs(o - s) <= 1e-6 * std::abs(s));
    }
}

TEST_CASE("system and Prufer angle agree modulo pi") {
  for (const Regularizer* reg : {&kZero, &kCoulomb, &kK14})
    for (BoundaryConditions bc : {kDirichlet, BoundaryConditions{pi / 4, pi / 3}, BoundaryConditions{pi / 2, 0.0}})
      for (double lambda : {3.0, 50.0, 400.0, 5000.0}) {
        const SystemState s = shoot_system(lambda, *reg, bc, 1e-13);
        PruferOptions o;
        o.tol = 1e-11;
        o.recordSteps = false;
        const double theta = integrate_theta(lambda, *reg, bc, o).thetaB;
        const double phase = wrap_pi(std::atan2(std::sqrt(lambda) * s.y0, s.y1));
        double d = std::abs(phase - wrap_pi(theta));
        d = std::min(d, pi - d);
        CHECK(d <= 1e-7);
      }
}

TEST_CASE("zero count is nondecreasing in lambda") {
  for (const Regularizer* reg : {&kZero, &kCoulomb, &kK14}) {
    int previous = -1;
    for (double lambda = -100.0; lambda <= 1e4; lambda = lambda < 0 ? lambda / 4 + 1.0 : lambda * 1.7 + 1.0) {
      const int z = shoot_system(lambda, *reg, kDirichlet).zeroCount;
      CHECK(z >= previous);
      previous = z;
    }
  }
}

TEST_CASE("eigen_count steps by one across each eigenvalue") {
  for (int n : {0, 1, 5}) {
    const double lambda = solve_eigenvalue(n, kCoulomb, {pi / 4, 0.0}, 1e-12).lambda;
    const double d = 1e-5 * std::max(1.0, std::abs(lambda));
    CHECK(eigen_count(lambda - d, kCoulomb, {pi / 4, 0.0}) == n);
    CHECK(eigen_count(lambda + d, kCoulomb, {pi / 4, 0.0}) == n + 1);
  }
}
