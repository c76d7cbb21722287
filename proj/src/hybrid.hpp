#pragma once

// Shared stepping machinery for the Prufer angle equation and the quasi-derivative
// system: an adaptive Runge-Kutta-Fehlberg 7(8) march away from the singular point,
// and Picard-iterated Gauss-Legendre collocation panels graded toward 0 inside (-delta, delta).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "sturm/error.hpp"
#include "sturm/potential.hpp"
#include "sturm/quadrature.hpp"

namespace sturm::detail {

template <std::size_t D>
using State = std::array<double, D>;

struct SingularLayout {
  double a = 0.0;
  double b = 0.0;
  bool singular = false;  // false: plain RK over [a, b]
  double delta = 0.0;
  PanelMesh inner;        // collocation panels on [-delta, delta] minus the gap
};

/// delta = min(-a, b)/4: collocation panels cover (-delta, delta), RK the rest.
/// gap: neighbourhood of 0 whose coefficient mass stays below tol/4 (frozen-state jump across it).
/// `frequency` bounds the local angular rate of the solution (sqrt(lambda) for the Prufer scale).
inline SingularLayout make_layout(const Regularizer& reg, double frequency, double tol) {
  SingularLayout layout;
  layout.a = reg.spec.a;
  layout.b = reg.spec.b;
  if (reg.fTerms.empty() && reg.FTerms.empty()) return layout;
  layout.singular = true;
  const double weightF = std::max(1.0, 1.0 / frequency);
  const double gap = singular_gap(reg, tol / 4.0, weightF);
  layout.delta = 0.25 * std::min(-reg.spec.a, reg.spec.b);
  MeshOptions mo;
  mo.gap = gap;
  mo.gradingRatio = 0.5;
  mo.oscillationScale = frequency;
  mo.panelsPerPeriod = 4.0;
  mo.panelCap = layout.delta / 8.0;
  layout.inner = build_mesh(-layout.delta, layout.delta, mo);
  return layout;
}

struct StepControl {
  double absTol = 1e-12;
  double relTol = 1e-14;
  double picardTol = 1e-14;
  std::size_t maxSteps = 5'000'000;
};

template <std::size_t D>
struct SampleSink {
  std::span<const double> at;  // sorted abscissae to sample
  std::vector<State<D>> values;
  std::size_t next = 0;
};

template <std::size_t D>
double max_abs_diff(const State<D>& l, const State<D>& r) {
  double m = 0.0;
  for (std::size_t k = 0; k < D; ++k) m = std::max(m, std::abs(l[k] - r[k]));
  return m;
}

/// Adaptive RK march over [x0, x1]. `cap(x)` bounds the step, `visit(x, y)` runs after every
/// accepted step and may rescale y.
template <std::size_t D, class Rhs, class Cap, class Visit>
void rk_segment(Rhs& rhs, Cap& cap, Visit& visit, State<D>& y, double x0, double x1, const StepControl& ctl,
                std::size_t& steps, SampleSink<D>* sink) {
  namespace odeint = boost::numeric::odeint;
  using Stepper = odeint::runge_kutta_fehlberg78<State<D>>;
  auto stepper = odeint::make_controlled<Stepper>(ctl.absTol, ctl.relTol);
  auto system = [&rhs](const State<D>& s, State<D>& ds, double x) { rhs(x, s, ds); };

  double x = x0;
  double dt = std::min(cap(x0), x1 - x0);
  while (x < x1) {
    double target = x1;
    if (sink)
      while (sink->next < sink->at.size() && sink->at[sink->next] <= x) {
        sink->values.push_back(y);
        ++sink->next;
      }
    if (sink && sink->next < sink->at.size()) target = std::min(target, sink->at[sink->next]);
    const double room = target - x;
    const double limit = cap(x);
    const bool clamped = dt >= room;
    double h = std::min({dt, limit, room});
    const double before = x;
    auto result = stepper.try_step(system, y, x, h);
    if (++steps > ctl.maxSteps) throw BudgetExceeded("ODE step budget exhausted", x);
    if (result == odeint::success) {
      if (clamped && std::abs(x - target) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                 std::max(1.0, std::abs(target)))
        x = target;
      if (x > x1) x = x1;
      visit(x, y);
      dt = h;  // suggested next step
    } else {
      dt = h;
      if (!(h > 0.0) || x != before) throw InconsistencyError("RK step control failed");
      if (h < 1e-300) throw BudgetExceeded("ODE step size underflow", x);
    }
  }
  if (sink)
    while (sink->next < sink->at.size() && sink->at[sink->next] <= x1) {
      sink->values.push_back(y);
      ++sink->next;
    }
}

/// Picard-iterated Gauss-Legendre collocation over one panel; splits on slow convergence.
template <std::size_t D, class Rhs>
State<D> picard_panel(Rhs& rhs, const State<D>& y0, double lo, double hi, const StepControl& ctl,
                      std::array<State<D>, GaussLegendre::n>& nodal, int depth = 0) {
  const auto& gl = GaussLegendre::instance();
  constexpr std::size_t n = GaussLegendre::n;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::array<State<D>, n> G{};
  State<D> slope{};
  rhs(lo, y0, slope);
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = half * (gl.nodes[i] + 1.0);
    for (std::size_t k = 0; k < D; ++k) nodal[i][k] = y0[k] + dx * slope[k];
  }
  double scale = 1.0;
  for (std::size_t k = 0; k < D; ++k) scale = std::max(scale, std::abs(y0[k]));
  bool converged = false;
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 40; ++it) {
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      rhs(mid + half * gl.nodes[i], nodal[i], G[i]);
      for (std::size_t k = 0; k < D; ++k) gmax = std::max(gmax, std::abs(G[i][k]));
    }
    const double floor = 1e-15 * (scale + 2.0 * half * gmax);
    double update = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      State<D> next = y0;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < D; ++k) next[k] += half * gl.integration[i][j] * G[j][k];
      update = std::max(update, max_abs_diff<D>(next, nodal[i]));
      nodal[i] = next;
    }
    if (update <= std::max(ctl.picardTol, floor) || (update <= 64.0 * floor && update >= 0.5 * previous)) {
      converged = true;
      break;
    }
    previous = update;
  }
  if (!converged) {
    if (depth > 30) throw BudgetExceeded("Picard panel iteration did not converge", lo);
    std::array<State<D>, n> scratch{};
    const State<D> ym = picard_panel<D>(rhs, y0, lo, mid, ctl, scratch, depth + 1);
    const State<D> yh = picard_panel<D>(rhs, ym, mid, hi, ctl, scratch, depth + 1);
    // Refill nodal values on the full panel from the two halves (used for sampling only).
    for (std::size_t i = 0; i < n; ++i) {
      const double x = mid + half * gl.nodes[i];
      const auto& src = x < mid ? ym : yh;
      nodal[i] = src;
    }
    return yh;
  }
  for (std::size_t i = 0; i < n; ++i) rhs(mid + half * gl.nodes[i], nodal[i], G[i]);
  State<D> end = y0;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < D; ++k) end[k] += half * gl.weights[j] * G[j][k];
  return end;
}

/// March from a to b. `gapJump(y, lo, hi)` carries the state across the excluded neighbourhood of 0.
template <std::size_t D, class Rhs, class Cap, class GapJump, class Visit>
State<D> integrate_hybrid(const SingularLayout& layout, State<D> y, Rhs& rhs, Cap& cap, GapJump& gapJump,
                          Visit& visit, const StepControl& ctl, SampleSink<D>* sink, std::size_t& steps) {
  if (!layout.singular) {
    rk_segment<D>(rhs, cap, visit, y, layout.a, layout.b, ctl, steps, sink);
    return y;
  }
  rk_segment<D>(rhs, cap, visit, y, layout.a, -layout.delta, ctl, steps, sink);

  const auto& gl = GaussLegendre::instance();
  std::array<State<D>, GaussLegendre::n> nodal{};
  auto drain_inside = [&](double lo, double hi, const State<D>& ylo, const State<D>& yhi, bool polynomial) {
    if (!sink) return;
    while (sink->next < sink->at.size() && sink->at[sink->next] <= hi) {
      const double x = sink->at[sink->next];
      State<D> v{};
      if (x <= lo) {
        v = ylo;
      } else if (x >= hi) {
        v = yhi;
      } else if (polynomial) {
        const double t = (x - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
        for (std::size_t k = 0; k < D; ++k) {
          std::array<double, GaussLegendre::n> comp{};
          for (std::size_t i = 0; i < GaussLegendre::n; ++i) comp[i] = nodal[i][k];
          v[k] = gl.interpolate(comp, t);
        }
      } else {
        const double w = (x - lo) / (hi - lo);
        for (std::size_t k = 0; k < D; ++k) v[k] = (1.0 - w) * ylo[k] + w * yhi[k];
      }
      sink->values.push_back(v);
      ++sink->next;
    }
  };

  const auto& panels = layout.inner.panels;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    if (p == layout.inner.panelsBeforeGap) {
      const State<D> before = y;
      y = gapJump(y, layout.inner.gapLo, layout.inner.gapHi);
      drain_inside(layout.inner.gapLo, layout.inner.gapHi, before, y, false);
      visit(layout.inner.gapHi, y);
    }
    const State<D> start = y;
    y = picard_panel<D>(rhs, y, panels[p].lo, panels[p].hi, ctl, nodal);
    ++steps;
    drain_inside(panels[p].lo, panels[p].hi, start, y, true);
    visit(panels[p].hi, y);
  }
  if (layout.inner.panelsBeforeGap == panels.size()) {
    y = gapJump(y, layout.inner.gapLo, layout.inner.gapHi);
    visit(layout.inner.gapHi, y);
  }
  rk_segment<D>(rhs, cap, visit, y, layout.delta, layout.b, ctl, steps, sink);
  return y;
}

}  // namespace sturm::detail
