#pragma once

#include <cstddef>
#include <vector>

#include "sturm/eigen_estimate.hpp"
#include "sturm/potential.hpp"
#include "sturm/prufer.hpp"
#include "sturm/quadrature.hpp"

namespace sturm {

/// Mesh for the approximants: Gauss-Legendre panels graded toward 0 and capped by the phase.
struct AsymptoticSettings {
  double panelsPerPeriod = 4.0;  // panels per period 2 pi / sqrt(lambda)
  double gradingRatio = 0.5;
  double gapBudget = 1e-15;      // |f| + |F| mass of the neighbourhood of 0 crossed with frozen angle

  void validate() const;
};

/// theta_j tabulated on panel ends and Gauss-Legendre nodes.
struct ApproximantTable {
  int order = 0;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  double thetaA = 0.0;
  std::vector<double> nodes;   // strictly increasing, nodes.front() == a, nodes.back() == b
  std::vector<double> values;  // theta_j at nodes
  PanelMesh mesh;
  std::vector<std::size_t> panelStart;  // index in nodes of each panel's left end; interior nodes follow

  /// theta_j(x) by degree-15 interpolation on the panel holding x, linear across the gap.
  double theta(double x) const;
  double thetaB() const { return values.back(); }
};

ApproximantTable theta_iterate(int j, double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                               const AsymptoticSettings& settings = {});

/// theta_0 .. theta_j sharing one mesh.
std::vector<ApproximantTable> theta_iterates(int j, double lambda, const Regularizer& reg,
                                             const BoundaryConditions& bc, const AsymptoticSettings& settings = {});

/// -int_a^b f sin(2 theta_N) + lambda^{-1/2} int_a^b F sin^2(theta_N). Requires check_conditions(reg, N).
double expansion_rhs(int N, double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                     const AsymptoticSettings& settings = {});

/// int_a^b g sin(2 theta_j) for g = f, over the table's mesh.
double oscillatory_integral(const ApproximantTable& table, const Regularizer& reg);

/// theta(b) - theta(a) prescribed by the boundary case, without the O(lambda^{-3/2}) remainder.
double case_target(int n, const BoundaryConditions& bc, double lambda);

enum class TargetRule {
  CaseFormula,     // case_target
  BoundaryAngles,  // n pi + theta_b(lambda) - theta_a(lambda) with f(a), f(b) included
};

struct AsymptoticOptions {
  TargetRule target = TargetRule::CaseFormula;
  AsymptoticSettings settings;
  int maxIterations = 200;
};

/// Solves (b - a) sqrt(lambda) + expansion_rhs(N, lambda) = target(n, lambda) for lambda.
EigenEstimate asym_eigenvalue(int n, int N, const Regularizer& reg, const BoundaryConditions& bc,
                              const AsymptoticOptions& options = {});

}  // namespace sturm
