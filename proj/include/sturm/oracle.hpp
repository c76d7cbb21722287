#pragma once

#include "sturm/eigen_estimate.hpp"
#include "sturm/potential.hpp"
#include "sturm/prufer.hpp"

namespace sturm {

/// (y, y^[1]) at x with bookkeeping from the march.
struct SystemState {
  double y0 = 0.0;
  double y1 = 0.0;
  double x = 0.0;
  int renormalizations = 0;  // rescalings that kept |(y0, y1)| inside [1e-6, 1e6]
  int zeroCount = 0;         // sign changes of y0 over (a, b]; a zero exactly at b is not counted
};

/// Integrates y0' = -f y0 + y1, y1' = (-F - lambda) y0 + f y1 from the initial data
/// (sin(alpha), cos(alpha) + f(a) sin(alpha)) at a. Valid for any real lambda.
SystemState shoot_system(double lambda, const Regularizer& reg, const BoundaryConditions& bc, double tol = 1e-12);

/// y0(b) cos(beta) - (y1(b) - f(b) y0(b)) sin(beta), normalized by |(y0, y1)|.
double boundary_mismatch(const SystemState& s, const Regularizer& reg, const BoundaryConditions& bc);

/// Number of eigenvalues strictly below lambda, from zero counting and the terminal phase.
int eigen_count(double lambda, const Regularizer& reg, const BoundaryConditions& bc, double tol = 1e-12);

/// lambda_n by bisection on eigen_count, finished on the sign of boundary_mismatch.
EigenEstimate oracle_eigenvalue(int n, const Regularizer& reg, const BoundaryConditions& bc, double tol = 1e-10);

/// C = 0: lambda_n = omega^2 with omega L + theta_a(omega) - theta_b(omega) = n pi, solved by bisection.
EigenEstimate exact_zero_potential_eigen(int n, double a, double b, const BoundaryConditions& bc);

}  // namespace sturm
