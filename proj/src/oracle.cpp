#include "sturm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hybrid.hpp"
#include "sturm/error.hpp"

namespace sturm {

namespace {

constexpr double kPi = std::numbers::pi;

double f_at(const Regularizer& reg, double x) { return reg.fTerms.empty() ? 0.0 : eval_f(reg, x); }

// Representative of an angle modulo pi in (0, pi].
double wrap_open_closed(double v) {
  v = std::fmod(v, kPi);
  if (v <= 0.0) v += kPi;
  return v;
}

double guess(int n, const Regularizer& reg, const BoundaryConditions& bc) {
  const double L = reg.spec.b - reg.spec.a;
  const double end = bc.beta == 0.0 ? kPi : 0.5 * kPi;
  const double start = bc.alpha == 0.0 ? 0.0 : 0.5 * kPi;
  const double s = std::max((n * kPi + end - start) / L, 0.5 * kPi / L);
  return s * s;
}

}  // namespace

SystemState shoot_system(double lambda, const Regularizer& reg, const BoundaryConditions& bc, double tol) {
  if (!std::isfinite(lambda)) throw ValidationError("lambda must be finite");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
  bc.validate();
  const double a = reg.spec.a;
  const double b = reg.spec.b;
  const double L = b - a;
  const double fA = f_at(reg, a);
  const double frequency = std::sqrt(std::abs(lambda)) + 1.0 / L;

  const auto layout = detail::make_layout(reg, frequency, tol);
  detail::StepControl ctl;
  ctl.relTol = std::max(tol / (1.0 + frequency * L), 1e-15);
  ctl.absTol = ctl.relTol;
  ctl.picardTol = std::max(tol / static_cast<double>(std::max<std::size_t>(1, layout.inner.panels.size())), 1e-16);

  auto rhs = [&](double x, const detail::State<2>& y, detail::State<2>& d) {
    const Coefficients c = eval_coefficients(reg, x);
    d[0] = -c.f * y[0] + y[1];
    d[1] = (-c.F - lambda) * y[0] + c.f * y[1];
  };
  auto cap = [&](double x) {
    double rate = std::sqrt(std::abs(lambda));
    if (x != 0.0) {
      const Coefficients c = eval_coefficients(reg, x);
      rate = std::sqrt(std::abs(lambda) + std::abs(c.F)) + std::abs(c.f);
    }
    return std::min(0.5 / std::max(rate, 1e-300), L / 16.0);
  };
  auto jump = [&](detail::State<2> y, double lo, double hi) {
    const double If = terms::integral(reg.fTerms, lo, hi);
    const double IF = terms::integral(reg.FTerms, lo, hi);
    const detail::State<2> y0 = y;
    y[0] += -If * y0[0] + (hi - lo) * y0[1];
    y[1] += (-IF - lambda * (hi - lo)) * y0[0] + If * y0[1];
    return y;
  };

  SystemState st;
  int lastSign = 0;
  const double yA = std::sin(bc.alpha);
  if (yA != 0.0) lastSign = yA > 0.0 ? 1 : -1;
  auto visit = [&](double x, detail::State<2>& y) {
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
      throw InconsistencyError("non-finite solution at x=" + std::to_string(x));
    const double norm = std::hypot(y[0], y[1]);
    if (norm > 1e6 || norm < 1e-6) {
      y[0] /= norm;
      y[1] /= norm;
      ++st.renormalizations;
    }
    if (y[0] != 0.0) {
      const int sg = y[0] > 0.0 ? 1 : -1;
      if (lastSign != 0 && sg != lastSign) ++st.zeroCount;
      lastSign = sg;
    }
  };

  std::size_t steps = 0;
  const auto end = detail::integrate_hybrid<2>(layout, detail::State<2>{yA, std::cos(bc.alpha) + fA * yA}, rhs,
                                               cap, jump, visit, ctl, nullptr, steps);
  st.y0 = end[0];
  st.y1 = end[1];
  st.x = b;
  return st;
}

double boundary_mismatch(const SystemState& s, const Regularizer& reg, const BoundaryConditions& bc) {
  const double fB = f_at(reg, reg.spec.b);
  const double norm = std::hypot(s.y0, s.y1);
  if (!(norm > 0.0)) throw InconsistencyError("trivial solution at b");
  return (s.y0 * std::cos(bc.beta) - (s.y1 - fB * s.y0) * std::sin(bc.beta)) / norm;
}

int eigen_count(double lambda, const Regularizer& reg, const BoundaryConditions& bc, double tol) {
  const SystemState s = shoot_system(lambda, reg, bc, tol);
  const double fB = f_at(reg, reg.spec.b);
  const double rho = wrap_open_closed(std::atan2(s.y0, s.y1));
  const double tau = wrap_open_closed(std::atan2(std::sin(bc.beta), std::cos(bc.beta) + fB * std::sin(bc.beta)));
  return s.zeroCount + (rho > tau ? 1 : 0);
}

EigenEstimate oracle_eigenvalue(int n, const Regularizer& reg, const BoundaryConditions& bc, double tol) {
  if (n < 0) throw ValidationError("eigenvalue index must be non-negative");
  if (!(tol > 0.0) || tol >= 1.0) throw ValidationError("tol must lie in (0,1)");
  bc.validate();
  const double L = reg.spec.b - reg.spec.a;
  const double unit = 1.0 / (L * L);
  const double integTol = std::clamp(1e-3 * tol, 1e-14, 1e-9);
  auto count = [&](double lambda) { return eigen_count(lambda, reg, bc, integTol); };

  double lo = guess(n, reg, bc);
  double hi = lo;
  if (count(lo) > n) {
    double stride = unit;
    int k = 0;
    do {
      hi = lo;
      lo = lo > 2.0 * unit ? 0.5 * lo : std::min(lo, unit) - (stride *= 2.0);
      if (++k > 200) throw BudgetExceeded("no lower bracket for eigenvalue " + std::to_string(n), lo);
    } while (count(lo) > n);
  } else {
    int k = 0;
    do {
      lo = hi;
      hi *= 2.0;
      if (++k > 80) throw BudgetExceeded("no upper bracket for eigenvalue " + std::to_string(n), hi);
    } while (count(hi) <= n);
  }

  auto m = [&](double lambda) { return boundary_mismatch(shoot_system(lambda, reg, bc, integTol), reg, bc); };
  auto width_ok = [&](double rel) { return hi - lo <= rel * std::max(std::abs(lo), std::abs(hi)) + tol * unit; };
  int iterations = 0;
  while (!width_ok(1e-3)) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) <= n ? lo : hi) = mid;
    if (++iterations > 400) throw BudgetExceeded("count bisection stalled", 0.5 * (lo + hi), hi - lo);
  }
  double mLo = m(lo);
  const double mHi = m(hi);
  if (mLo * mHi > 0.0) throw InconsistencyError("boundary mismatch does not change sign across the count bracket");
  while (!width_ok(0.5 * tol)) {
    const double mid = 0.5 * (lo + hi);
    const double mMid = m(mid);
    const bool below = count(mid) <= n;
    const bool sameAsLo = (mMid > 0.0) == (mLo > 0.0) || mMid == 0.0;
    if (below != sameAsLo) throw InconsistencyError("zero count and boundary mismatch disagree at lambda=" + std::to_string(mid));
    if (below) {
      lo = mid;
      mLo = mMid;
    } else {
      hi = mid;
    }
    if (++iterations > 400) throw BudgetExceeded("mismatch bisection stalled", 0.5 * (lo + hi), hi - lo);
  }
  EigenEstimate est;
  est.n = n;
  est.lambda = 0.5 * (lo + hi);
  est.method = EstimateMethod::Oracle;
  est.residual = std::abs(m(est.lambda));
  return est;
}

EigenEstimate exact_zero_potential_eigen(int n, double a, double b, const BoundaryConditions& bc) {
  if (n < 0) throw ValidationError("eigenvalue index must be non-negative");
  if (!(a < b)) throw ValidationError("need a < b");
  bc.validate();
  const double L = b - a;
  auto g = [&](double w) {
    double ta = std::atan2(w * std::sin(bc.alpha), std::cos(bc.alpha));
    if (ta < 0.0) ta += kPi;
    const double tb = wrap_open_closed(std::atan2(w * std::sin(bc.beta), std::cos(bc.beta)));
    return w * L + ta - tb - n * kPi;
  };
  double lo = std::max(0.0, (n - 1) * kPi / L);
  double hi = (n + 1) * kPi / L;
  if (lo == 0.0) {
    const double tiny = 1e-300;
    if (g(tiny) > 0.0) throw DomainError("closed form covers positive eigenvalues only");
  }
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) <= 0.0 ? lo : hi) = mid;
  }
  EigenEstimate est;
  est.n = n;
  const double w = 0.5 * (lo + hi);
  est.lambda = w * w;
  est.method = EstimateMethod::ClosedForm;
  est.residual = std::abs(g(w));
  return est;
}

}  // namespace sturm
