#include "sturm/asymptotic.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include "sturm/error.hpp"
#include "sturm/oracle.hpp"

namespace sturm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kNodes = GaussLegendre::n;

double f_at(const Regularizer& reg, double x) { return reg.fTerms.empty() ? 0.0 : eval_f(reg, x); }

// Mesh, node abscissae and coefficient samples shared by every iterate at one lambda.
struct Grid {
  double lambda = 0.0;
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;
  double thetaA = 0.0;
  PanelMesh mesh;
  std::vector<double> nodes;
  std::vector<std::size_t> panelStart;
  std::vector<double> f;
  std::vector<double> F;
  double gapF = 0.0;   // exact integrals over the excluded neighbourhood of 0
  double gapFF = 0.0;

  double theta0(std::size_t i) const { return thetaA + s * (nodes[i] - a); }
};

Grid make_grid(double lambda, const Regularizer& reg, const BoundaryConditions& bc, const AsymptoticSettings& st) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be positive and finite");
  bc.validate();
  st.validate();
  Grid g;
  g.lambda = lambda;
  g.s = std::sqrt(lambda);
  g.a = reg.spec.a;
  g.b = reg.spec.b;
  g.thetaA = theta_a(lambda, bc, f_at(reg, g.a));

  MeshOptions mo;
  mo.gradingRatio = st.gradingRatio;
  mo.panelCap = (g.b - g.a) / 16.0;
  mo.oscillationScale = g.s;
  mo.panelsPerPeriod = st.panelsPerPeriod;
  const bool regular = reg.fTerms.empty() && reg.FTerms.empty();
  mo.gap = regular ? 1e-14 * (g.b - g.a) : singular_gap(reg, st.gapBudget, 1.0 / g.s);
  g.mesh = build_mesh(g.a, g.b, mo);

  const auto& gl = GaussLegendre::instance();
  const auto& panels = g.mesh.panels;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    if (g.mesh.hasGap && p == g.mesh.panelsBeforeGap && p > 0) g.nodes.push_back(panels[p - 1].hi);
    g.panelStart.push_back(g.nodes.size());
    g.nodes.push_back(panels[p].lo);
    for (std::size_t i = 0; i < kNodes; ++i) g.nodes.push_back(panels[p].mid() + panels[p].halfWidth() * gl.nodes[i]);
  }
  if (g.mesh.hasGap && g.mesh.panelsBeforeGap == panels.size()) g.nodes.push_back(panels.back().hi);
  g.nodes.push_back(panels.back().hi);
  if (g.nodes.front() != g.a || g.nodes.back() != g.b) throw InconsistencyError("approximant mesh does not span [a,b]");
  for (std::size_t i = 1; i < g.nodes.size(); ++i)
    if (!(g.nodes[i] > g.nodes[i - 1])) throw InconsistencyError("approximant nodes not strictly increasing");

  g.f.resize(g.nodes.size());
  g.F.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const Coefficients c = eval_coefficients(reg, g.nodes[i]);
    g.f[i] = c.f;
    g.F[i] = c.F;
  }
  if (g.mesh.hasGap) {
    g.gapF = terms::integral(reg.fTerms, g.mesh.gapLo, g.mesh.gapHi);
    g.gapFF = terms::integral(reg.FTerms, g.mesh.gapLo, g.mesh.gapHi);
  }
  return g;
}

double integrand(const Grid& g, std::size_t i, double psi) {
  const double th = g.theta0(i) + psi;
  const double sn = std::sin(th);
  return -g.f[i] * std::sin(2.0 * th) + g.F[i] * sn * sn / g.s;
}

// psi_{j+1} at every node from psi_j, cumulative from a. Returns the full integral over [a, b].
double advance(const Grid& g, const std::vector<double>& psi, std::vector<double>* next) {
  const auto& gl = GaussLegendre::instance();
  const auto& panels = g.mesh.panels;
  NeumaierSum running;
  std::array<double, kNodes> G{};
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const std::size_t base = g.panelStart[p];
    if (g.mesh.hasGap && p == g.mesh.panelsBeforeGap && p > 0) {
      // Frozen-angle jump across the excluded neighbourhood, at the left gap edge.
      const std::size_t edge = base - 1;
      const double th = g.theta0(edge) + psi[edge];
      const double sn = std::sin(th);
      if (next) (*next)[edge] = running.value();
      running.add(-std::sin(2.0 * th) * g.gapF + sn * sn * g.gapFF / g.s);
    }
    const double start = running.value();
    if (next) (*next)[base] = start;
    const double half = panels[p].halfWidth();
    for (std::size_t i = 0; i < kNodes; ++i) G[i] = integrand(g, base + 1 + i, psi[base + 1 + i]);
    if (next) {
      for (std::size_t i = 0; i < kNodes; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < kNodes; ++k) acc += gl.integration[i][k] * G[k];
        (*next)[base + 1 + i] = start + half * acc;
      }
    }
    for (std::size_t k = 0; k < kNodes; ++k) running.add(half * gl.weights[k] * G[k]);
  }
  const std::size_t last = g.nodes.size() - 1;
  if (g.mesh.hasGap && g.mesh.panelsBeforeGap == panels.size()) {
    const double th = g.theta0(last - 1) + psi[last - 1];
    const double sn = std::sin(th);
    if (next) (*next)[last - 1] = running.value();
    running.add(-std::sin(2.0 * th) * g.gapF + sn * sn * g.gapFF / g.s);
  }
  if (next) (*next)[last] = running.value();
  return running.value();
}

ApproximantTable make_table(const Grid& g, int order, const std::vector<double>& psi) {
  ApproximantTable t;
  t.order = order;
  t.lambda = g.lambda;
  t.a = g.a;
  t.b = g.b;
  t.thetaA = g.thetaA;
  t.nodes = g.nodes;
  t.mesh = g.mesh;
  t.panelStart = g.panelStart;
  t.values.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) t.values[i] = g.theta0(i) + psi[i];
  return t;
}

void require_conditions(const Regularizer& reg, int N) {
  if (N < 1) throw ValidationError("expansion order N must be >= 1");
  const ConditionReport report = check_conditions(reg, N);
  if (!report.holds) throw ValidationError("conditions fail for order N=" + std::to_string(N) + ": " + report.failing);
}

double expansion_unchecked(int N, double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                           const AsymptoticSettings& st) {
  const Grid g = make_grid(lambda, reg, bc, st);
  std::vector<double> psi(g.nodes.size(), 0.0);
  std::vector<double> next(g.nodes.size(), 0.0);
  for (int j = 0; j < N; ++j) {
    advance(g, psi, &next);
    psi.swap(next);
  }
  return advance(g, psi, nullptr);
}

}  // namespace

void AsymptoticSettings::validate() const {
  if (!(panelsPerPeriod >= 1.0) || !std::isfinite(panelsPerPeriod)) throw ValidationError("panelsPerPeriod must be >= 1");
  if (!(gradingRatio > 0.0 && gradingRatio < 1.0)) throw ValidationError("gradingRatio must lie in (0,1)");
  if (!(gapBudget > 0.0)) throw ValidationError("gapBudget must be positive");
}

double ApproximantTable::theta(double x) const {
  if (!(x >= a && x <= b)) throw DomainError("approximant evaluated outside [a,b]");
  const auto& panels = mesh.panels;
  if (mesh.hasGap && x > mesh.gapLo && x < mesh.gapHi) {
    const std::size_t lo = mesh.panelsBeforeGap > 0 ? panelStart[mesh.panelsBeforeGap] - 1 : 0;
    const std::size_t hi = lo + 1;
    const double w = (x - nodes[lo]) / (nodes[hi] - nodes[lo]);
    return (1.0 - w) * values[lo] + w * values[hi];
  }
  auto it = std::upper_bound(panels.begin(), panels.end(), x, [](double v, const Panel& p) { return v < p.lo; });
  const std::size_t p = it == panels.begin() ? 0 : static_cast<std::size_t>(it - panels.begin()) - 1;
  const std::size_t base = panelStart[p];
  if (x == nodes[base]) return values[base];
  if (x == panels[p].hi) return values[base + kNodes + 1];
  // Interpolate the smooth part psi_j = theta_j - theta_0 and add theta_0 back.
  const double s = std::sqrt(lambda);
  std::array<double, kNodes> psi{};
  for (std::size_t i = 0; i < kNodes; ++i) psi[i] = values[base + 1 + i] - (thetaA + s * (nodes[base + 1 + i] - a));
  const double t = (x - panels[p].mid()) / panels[p].halfWidth();
  return thetaA + s * (x - a) + GaussLegendre::instance().interpolate(psi, t);
}

std::vector<ApproximantTable> theta_iterates(int j, double lambda, const Regularizer& reg,
                                             const BoundaryConditions& bc, const AsymptoticSettings& settings) {
  if (j < 0) throw ValidationError("iterate index must be non-negative");
  const Grid g = make_grid(lambda, reg, bc, settings);
  std::vector<ApproximantTable> out;
  std::vector<double> psi(g.nodes.size(), 0.0);
  std::vector<double> next(g.nodes.size(), 0.0);
  out.push_back(make_table(g, 0, psi));
  for (int k = 1; k <= j; ++k) {
    advance(g, psi, &next);
    psi.swap(next);
    out.push_back(make_table(g, k, psi));
  }
  return out;
}

ApproximantTable theta_iterate(int j, double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                               const AsymptoticSettings& settings) {
  auto all = theta_iterates(j, lambda, reg, bc, settings);
  return std::move(all.back());
}

double expansion_rhs(int N, double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                     const AsymptoticSettings& settings) {
  require_conditions(reg, N);
  return expansion_unchecked(N, lambda, reg, bc, settings);
}

double oscillatory_integral(const ApproximantTable& table, const Regularizer& reg) {
  const auto& gl = GaussLegendre::instance();
  const auto& panels = table.mesh.panels;
  NeumaierSum sum;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const std::size_t base = table.panelStart[p];
    for (std::size_t k = 0; k < kNodes; ++k) {
      const double x = table.nodes[base + 1 + k];
      sum.add(panels[p].halfWidth() * gl.weights[k] * eval_coefficients(reg, x).f * std::sin(2.0 * table.values[base + 1 + k]));
    }
  }
  if (table.mesh.hasGap) {
    const double x = table.mesh.gapLo;
    sum.add(std::sin(2.0 * table.theta(x)) * terms::integral(reg.fTerms, table.mesh.gapLo, table.mesh.gapHi));
  }
  return sum.value();
}

double case_target(int n, const BoundaryConditions& bc, double lambda) {
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  bc.validate();
  const double r = 1.0 / std::sqrt(lambda);
  const bool alphaZero = bc.alpha == 0.0;
  const bool betaZero = bc.beta == 0.0;
  auto cot = [](double v) { return std::cos(v) / std::sin(v); };
  if (alphaZero && betaZero) return (n + 1) * kPi;
  if (alphaZero) return (n + 0.5) * kPi - r * cot(bc.beta);
  if (betaZero) return (n + 0.5) * kPi + r * cot(bc.alpha);
  return n * kPi + r * (cot(bc.alpha) - cot(bc.beta));
}

EigenEstimate asym_eigenvalue(int n, int N, const Regularizer& reg, const BoundaryConditions& bc,
                              const AsymptoticOptions& options) {
  if (n < 0) throw ValidationError("eigenvalue index must be non-negative");
  bc.validate();
  require_conditions(reg, N);
  const double L = reg.spec.b - reg.spec.a;
  const double fA = f_at(reg, reg.spec.a);
  const double fB = f_at(reg, reg.spec.b);
  auto target = [&](double s) {
    const double lambda = s * s;
    if (options.target == TargetRule::CaseFormula) return case_target(n, bc, lambda);
    double tb = theta_target_b(lambda, bc, fB);
    if (tb == 0.0) tb = kPi;
    return n * kPi + tb - theta_a(lambda, bc, fA);
  };
  auto map = [&](double s) { return (target(s) - expansion_unchecked(N, s * s, reg, bc, options.settings)) / L; };
  auto residual = [&](double s) { return L * s - (target(s) - expansion_unchecked(N, s * s, reg, bc, options.settings)); };

  double s;
  try {
    s = std::sqrt(exact_zero_potential_eigen(n, reg.spec.a, reg.spec.b, bc).lambda);
  } catch (const DomainError&) {
    s = std::max(n, 1) * kPi / L;
  }

  EigenEstimate est;
  est.n = n;
  est.method = EstimateMethod::Asymptotic;
  est.order = N;

  // Fixed point on s = sqrt(lambda); hand over to a secant iteration when it stalls or leaves s > 0.
  double prevStep = std::numeric_limits<double>::infinity();
  int slow = 0;
  int it = 0;
  double sPrev = s;
  bool converged = false;
  for (; it < options.maxIterations; ++it) {
    const double sNext = map(s);
    const double step = std::abs(sNext - s);
    if (!(sNext > 0.0) || !std::isfinite(sNext)) break;
    sPrev = s;
    s = sNext;
    if (step <= 1e-12 * s) {
      converged = true;
      break;
    }
    slow = step > 0.9 * prevStep ? slow + 1 : 0;
    prevStep = step;
    if (slow >= 3) break;
  }
  if (!converged) {
    double x0 = sPrev > 0.0 && sPrev != s ? sPrev : s * (1.0 + 1e-6);
    double x1 = s;
    double r0 = residual(x0);
    double r1 = residual(x1);
    for (; it < options.maxIterations; ++it) {
      if (r1 == r0) break;
      double x2 = x1 - r1 * (x1 - x0) / (r1 - r0);
      // Keep the step within a factor of two of the current iterate.
      x2 = std::clamp(x2, 0.5 * x1, 2.0 * x1);
      const double step = std::abs(x2 - x1);
      x0 = x1;
      r0 = r1;
      x1 = x2;
      r1 = residual(x1);
      if (step <= 1e-12 * x1) {
        converged = true;
        break;
      }
    }
    s = x1;
    if (!converged)
      throw BudgetExceeded("asymptotic eigenvalue iteration did not converge", s * s, std::abs(r1));
  }
  est.lambda = s * s;
  est.residual = std::abs(residual(s));
  return est;
}

}  // namespace sturm
