#include <cmath>
#include <functional>
#include <numbers>

#include "doctest.h"
#include "reference.hpp"
#include "sturm/error.hpp"
#include "sturm/oracle.hpp"
#include "sturm/potential.hpp"
#include "sturm/prufer.hpp"

using namespace sturm;
using std::numbers::pi;

namespace {
const Regularizer kZero = build_regularizer({0.0, 1.0, -1.0, 1.0});
const Regularizer kCoulomb = build_regularizer({1.0, 1.0, -1.0, 1.0});
const BoundaryConditions kDirichlet{0.0, 0.0};

// theta(b) at lambda = 400 on the C = 1, K = 1 Dirichlet instance.
constexpr double kThetaB400 = 40.19381578858;
// max over n = 1..80 of |sqrt(lambda_n) - (theta(b) - theta(a)) / 2| on the same instance.
constexpr double kWorst17 = 0.440183736460;

double theta_b(double lambda, const Regularizer& reg, const BoundaryConditions& bc, double tol = 1e-11) {
  PruferOptions o;
  o.tol = tol;
  o.recordSteps = false;
  return integrate_theta(lambda, reg, bc, o).thetaB;
}

// Fixed-step RK4 on theta' = mu cos^2 + (lambda + F) sin^2 / mu - f sin 2theta with hand-coded f, F.
double theta_b_reference(double lambda, double stepsPerUnit) {
  const double mu = std::sqrt(lambda);
  const auto pts = testing::graded_breakpoints(-1.0, 1.0, stepsPerUnit, 64, 1e-15);
  std::function<void(double, const std::array<double, 1>&, std::array<double, 1>&)> rhs =
      [&](double x, const std::array<double, 1>& y, std::array<double, 1>& d) {
        const double l = std::log(std::abs(x));
        const double f = -std::copysign(1.0, x) * l, F = l * l;
        const double s = std::sin(y[0]), c = std::cos(y[0]);
        d[0] = mu * c * c + (lambda + F) * s * s / mu - 2.0 * f * s * c;
      };
  return testing::rk4_fixed<1>(rhs, {0.0}, pts, 1e-15)[0];
}
}  // namespace

TEST_CASE("boundary conditions are validated") {
  CHECK_THROWS_WITH_AS((BoundaryConditions{pi, 0.0}.validate()), "alpha out of range [0,pi)", ValidationError);
  CHECK_THROWS_WITH_AS((BoundaryConditions{0.0, -0.1}.validate()), "beta out of range [0,pi)", ValidationError);
  CHECK_THROWS_AS(solve_eigenvalue(0, kZero, {0.0, 4.0}), ValidationError);
  CHECK_THROWS_AS(solve_eigenvalue(-1, kZero, kDirichlet), ValidationError);
}

TEST_CASE("initial angle") {
  for (double lambda : {0.5, 7.0, 1e4}) CHECK(theta_a(lambda, kDirichlet, 3.0) == 0.0);
  CHECK(theta_a(4.0, {pi / 2, 0.0}, 0.0) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(theta_a(1.0, {pi / 4, 0.0}, 0.0) == doctest::Approx(pi / 4).epsilon(1e-15));
}

TEST_CASE("terminal angle") {
  for (double lambda : {0.5, 7.0, 1e4}) CHECK(theta_target_b(lambda, kDirichlet, -2.0) == 0.0);
  CHECK(theta_target_b(4.0, {0.0, pi / 2}, 0.0) == doctest::Approx(pi / 2).epsilon(1e-15));
  // tan(theta) = sqrt(lambda) / (cot(beta) + f(b)) = 10 / 1.5
  CHECK(theta_target_b(100.0, {0.0, pi / 4}, 0.5) == doctest::Approx(std::atan(10.0 / 1.5)).epsilon(1e-14));
  CHECK(theta_target_b(100.0, {0.0, pi / 4}, 0.5) == doctest::Approx(1.4219063791853994).epsilon(1e-14));
}

TEST_CASE("zero potential: theta grows linearly") {
  CHECK(theta_b(pi * pi, kZero, kDirichlet) == doctest::Approx(2.0 * pi).epsilon(1e-12));
  CHECK(theta_b(4.0, kZero, {pi / 2, 0.0}) == doctest::Approx(pi / 2 + 4.0).epsilon(1e-12));
}

TEST_CASE("theta(b) at lambda = 400 against a fixed-step reference") {
  const double coarse = theta_b_reference(400.0, 20000.0);
  const double fine = theta_b_reference(400.0, 40000.0);
  const double lib = theta_b(400.0, kCoulomb, kDirichlet, 1e-10);
  CHECK(std::abs(coarse - fine) <= 1e-8);
  CHECK(std::abs(lib - fine) <= 1e-8);
  CHECK(std::abs(lib - kThetaB400) <= 1e-9);
}

TEST_CASE("sampled trajectory") {
  PruferOptions o;
  o.sampleAt = {-0.75, -1e-3, 0.0, 0.5, 1.0};
  const PruferSolution s = integrate_theta(100.0, kZero, kDirichlet, o);
  REQUIRE(s.sampled.size() == o.sampleAt.size());
  for (std::size_t i = 0; i < o.sampleAt.size(); ++i)
    CHECK(s.sampled[i] == doctest::Approx(10.0 * (o.sampleAt[i] + 1.0)).epsilon(1e-11));
  const PruferSolution c = integrate_theta(100.0, kCoulomb, kDirichlet, o);
  for (std::size_t i = 1; i < c.samples.size(); ++i) CHECK(c.samples[i].first > c.samples[i - 1].first);
  CHECK(c.samples.front().first == -1.0);
  CHECK(c.samples.back().first == 1.0);
}

TEST_CASE("zero potential eigenvalues") {
  CHECK(solve_eigenvalue(0, kZero, kDirichlet).lambda == doctest::Approx(pi * pi / 4).epsilon(1e-10));
  CHECK(solve_eigenvalue(4, kZero, kDirichlet).lambda == doctest::Approx(61.68502750680849).epsilon(1e-10));
  const Regularizer wide = build_regularizer({0.0, 1.0, -pi / 2, pi / 2});
  const BoundaryConditions mixed{0.0, pi / 2};
  const double lambda3 = solve_eigenvalue(3, wide, mixed).lambda;
  CHECK(lambda3 == doctest::Approx(12.25).epsilon(1e-10));
  CHECK(lambda3 == doctest::Approx(exact_zero_potential_eigen(3, -pi / 2, pi / 2, mixed).lambda).epsilon(1e-10));
}

TEST_CASE("theta(b) increases with lambda") {
  for (const Regularizer* reg : {&kZero, &kCoulomb}) {
    double previous = -INFINITY;
    for (double lambda = 1.0; lambda <= 4096.0; lambda *= 4.0) {
      const double t = theta_b(lambda, *reg, kDirichlet);
      CHECK(t > previous);
      previous = t;
    }
  }
}

TEST_CASE("eigenvalues interlace") {
  const Regularizer k14 = build_regularizer({1.0, 1.4, -1.0, 1.0});
  struct Instance {
    const Regularizer* reg;
    BoundaryConditions bc;
  };
  const Instance instances[] = {
      {&kZero, kDirichlet}, {&kCoulomb, kDirichlet}, {&kCoulomb, {pi / 4, 0.0}}, {&k14, {0.0, pi / 4}}};
  for (const auto& inst : instances) {
    double previous = -INFINITY;
    for (int n = 0; n <= 10; ++n) {
      const double lambda = solve_eigenvalue(n, *inst.reg, inst.bc).lambda;
      CHECK(lambda > previous);
      previous = lambda;
    }
  }
}

TEST_CASE("mismatch changes sign at the eigenvalue") {
  const EigenEstimate e = solve_eigenvalue(6, kCoulomb, {pi / 4, pi / 3}, 1e-12);
  const double below = eigen_mismatch(6, e.lambda * (1.0 - 1e-6), kCoulomb, {pi / 4, pi / 3}, 1e-12);
  const double above = eigen_mismatch(6, e.lambda * (1.0 + 1e-6), kCoulomb, {pi / 4, pi / 3}, 1e-12);
  CHECK(below < 0.0);
  CHECK(above > 0.0);
  CHECK(e.method == EstimateMethod::ExactShooting);
  CHECK(e.methodTag() == "exact-shooting");
}

TEST_CASE("the lowest eigenvalue is negative for C = 1, K = 1") {
  const EigenEstimate e = solve_eigenvalue(0, kCoulomb, kDirichlet, 1e-12);
  CHECK(e.lambda == doctest::Approx(-5.95669264815).epsilon(1e-10));
}

TEST_CASE("halving tol moves lambda_n by at most 4 tol lambda_n") {
  const double tol = 1e-8;
  for (int n = 0; n <= 10; ++n) {
    const double l1 = solve_eigenvalue(n, kCoulomb, kDirichlet, tol).lambda;
    const double l2 = solve_eigenvalue(n, kCoulomb, kDirichlet, tol / 2).lambda;
    CHECK(std::abs(l1 - l2) <= 4.0 * tol * std::abs(l2));
  }
}

TEST_CASE("sqrt(lambda_n) - (theta(b) - theta(a)) / (b - a) stays bounded") {
  double worst = 0.0;
  for (int n = 1; n <= 80; ++n) {
    const double lambda = solve_eigenvalue(n, kCoulomb, kDirichlet, 1e-12).lambda;
    PruferOptions o;
    o.tol = 1e-11;
    o.recordSteps = false;
    const PruferSolution s = integrate_theta(lambda, kCoulomb, kDirichlet, o);
    worst = std::max(worst, std::abs(std::sqrt(lambda) - (s.thetaB - s.thetaA) / 2.0));
  }
  CHECK(worst == doctest::Approx(kWorst17).epsilon(1e-6));
}
