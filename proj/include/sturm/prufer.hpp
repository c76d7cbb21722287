#pragma once

#include <span>
#include <utility>
#include <vector>

#include "sturm/eigen_estimate.hpp"
#include "sturm/potential.hpp"

namespace sturm {

/// y(a) cos(alpha) - y'(a) sin(alpha) = 0, same at b with beta; both in [0, pi).
struct BoundaryConditions {
  double alpha = 0.0;
  double beta = 0.0;

  void validate() const;
};

/// Initial Prufer angle atan2(sqrt(lambda) sin(alpha), cos(alpha) + f(a) sin(alpha)) in [0, pi).
double theta_a(double lambda, const BoundaryConditions& bc, double fA);
/// Terminal angle the eigenfunction must reach modulo pi, in [0, pi); 0 means a multiple of pi.
double theta_target_b(double lambda, const BoundaryConditions& bc, double fB);

struct PruferOptions {
  double tol = 1e-10;                // absolute angle tolerance
  /// Angle scale mu in tan(theta) = mu y / y^[1]; 0 selects sqrt(lambda). Any mu > 0 admits lambda <= 0.
  double scale = 0.0;
  std::vector<double> sampleAt;      // extra abscissae, sorted, inside [a, b]
  bool recordSteps = true;
  std::size_t maxSteps = 5'000'000;
};

struct PruferSolution {
  double lambda = 0.0;
  double scale = 0.0;
  double thetaA = 0.0;
  /// theta(b) - thetaA - scale (b - a); carries the potential's contribution without cancellation.
  double psiB = 0.0;
  double thetaB = 0.0;
  std::vector<std::pair<double, double>> samples;  // (x, theta) at accepted steps, strictly increasing x
  std::vector<double> sampled;                     // theta at PruferOptions::sampleAt
  double tolUsed = 0.0;
  std::size_t steps = 0;
};

PruferSolution integrate_theta(double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                               const PruferOptions& options = {});

/// theta(b) - (target + n pi), target taken in (0, pi]. Its sign changes only at lambda_n;
/// for a fixed scale it is also increasing in lambda.
double eigen_mismatch(int n, double lambda, const Regularizer& reg, const BoundaryConditions& bc, double angleTol,
                      double scale = 0.0);

/// lambda_n by bracketing from the zero-potential prediction and a safeguarded root solve.
/// lambda_n may be negative; there the angle scale is sqrt(max(|lambda|, (pi / (4 (b - a)))^2)).
EigenEstimate solve_eigenvalue(int n, const Regularizer& reg, const BoundaryConditions& bc, double tol = 1e-10);

}  // namespace sturm
