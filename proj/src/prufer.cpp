#include "sturm/prufer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "hybrid.hpp"
#include "sturm/error.hpp"

namespace sturm {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_half_open(double v) {
  if (v < 0.0) v += kPi;
  if (v >= kPi) v -= kPi;
  return v;
}

double f_at(const Regularizer& reg, double x) { return reg.fTerms.empty() ? 0.0 : eval_f(reg, x); }

// Large-lambda limit of the mismatch: sqrt(lambda) (b - a) ~ n pi + (pi or pi/2) - (0 or pi/2).
double zero_potential_guess(int n, const Regularizer& reg, const BoundaryConditions& bc) {
  const double L = reg.spec.b - reg.spec.a;
  const double end = bc.beta == 0.0 ? kPi : 0.5 * kPi;
  const double start = bc.alpha == 0.0 ? 0.0 : 0.5 * kPi;
  const double s = std::max((n * kPi + end - start) / L, 0.5 * kPi / L);
  return s * s;
}

double scale_floor(const Regularizer& reg) { return 0.25 * kPi / (reg.spec.b - reg.spec.a); }

double angle_tolerance(double tol, double mu, const Regularizer& reg) {
  return std::clamp(0.1 * tol * std::max(1.0, (reg.spec.b - reg.spec.a) * mu), 1e-13, 1e-6);
}

double boundary_angle(double mu, double angle, double fEnd) {
  return wrap_half_open(std::atan2(mu * std::sin(angle), std::cos(angle) + fEnd * std::sin(angle)));
}

}  // namespace

void BoundaryConditions::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v < kPi; };
  if (!ok(alpha)) throw ValidationError("alpha out of range [0,pi)");
  if (!ok(beta)) throw ValidationError("beta out of range [0,pi)");
}

double theta_a(double lambda, const BoundaryConditions& bc, double fA) {
  return boundary_angle(std::sqrt(lambda), bc.alpha, fA);
}

double theta_target_b(double lambda, const BoundaryConditions& bc, double fB) {
  return boundary_angle(std::sqrt(lambda), bc.beta, fB);
}

PruferSolution integrate_theta(double lambda, const Regularizer& reg, const BoundaryConditions& bc,
                               const PruferOptions& options) {
  if (!std::isfinite(lambda)) throw ValidationError("lambda must be finite");
  if (options.scale == 0.0 && !(lambda > 0.0)) throw ValidationError("lambda must be positive without an angle scale");
  if (!(options.scale >= 0.0) || !std::isfinite(options.scale)) throw ValidationError("angle scale must be positive");
  if (!(options.tol > 0.0)) throw ValidationError("tol must be positive");
  bc.validate();
  const double a = reg.spec.a;
  const double b = reg.spec.b;
  if (!std::is_sorted(options.sampleAt.begin(), options.sampleAt.end()))
    throw ValidationError("sample abscissae must be sorted");
  for (double x : options.sampleAt)
    if (!(x >= a && x <= b)) throw ValidationError("sample abscissa outside [a,b]");

  const double mu = options.scale > 0.0 ? options.scale : std::sqrt(lambda);
  // theta' = mu + shift sin^2(theta) - f sin(2 theta) + F sin^2(theta) / mu, shift = (lambda - mu^2) / mu.
  const double shift = options.scale > 0.0 ? (lambda - mu * mu) / mu : 0.0;
  const double rate = std::max(mu, std::abs(lambda) / mu);
  PruferSolution sol;
  sol.lambda = lambda;
  sol.scale = mu;
  sol.thetaA = boundary_angle(mu, bc.alpha, f_at(reg, a));
  sol.tolUsed = options.tol;
  const double thA = sol.thetaA;

  const auto layout = detail::make_layout(reg, rate, options.tol);
  detail::StepControl ctl;
  ctl.absTol = std::max(options.tol / (16.0 * (1.0 + 2.0 * rate * (b - a))), 1e-17);
  ctl.relTol = 1e-15;
  ctl.picardTol = std::max(options.tol / (4.0 * std::max<std::size_t>(1, layout.inner.panels.size())), 1e-17);
  ctl.maxSteps = options.maxSteps;

  auto angle = [&](double x, double psi) { return thA + mu * (x - a) + psi; };
  auto rhs = [&](double x, const detail::State<1>& psi, detail::State<1>& d) {
    const Coefficients c = eval_coefficients(reg, x);
    const double th = angle(x, psi[0]);
    const double sn = std::sin(th);
    d[0] = -c.f * std::sin(2.0 * th) + (shift + c.F / mu) * sn * sn;
  };
  const double capBase = std::min(0.5 / rate, (b - a) / 16.0);
  auto cap = [&](double) { return capBase; };
  auto jump = [&](detail::State<1> psi, double lo, double hi) {
    const double th = angle(0.5 * (lo + hi), psi[0]);
    const double sn = std::sin(th);
    psi[0] += -std::sin(2.0 * th) * terms::integral(reg.fTerms, lo, hi) +
              sn * sn * (terms::integral(reg.FTerms, lo, hi) / mu + shift * (hi - lo));
    return psi;
  };
  if (options.recordSteps) sol.samples.emplace_back(a, thA);
  auto visit = [&](double x, detail::State<1>& psi) {
    if (!std::isfinite(psi[0])) throw InconsistencyError("non-finite Prufer angle at x=" + std::to_string(x));
    if (options.recordSteps && x > sol.samples.back().first) sol.samples.emplace_back(x, angle(x, psi[0]));
  };

  detail::SampleSink<1> sink;
  sink.at = options.sampleAt;
  const auto end = detail::integrate_hybrid<1>(layout, detail::State<1>{0.0}, rhs, cap, jump, visit, ctl,
                                               options.sampleAt.empty() ? nullptr : &sink, sol.steps);
  sol.psiB = end[0];
  sol.thetaB = angle(b, end[0]);
  sol.sampled.reserve(sink.values.size());
  for (std::size_t i = 0; i < sink.values.size(); ++i) sol.sampled.push_back(angle(options.sampleAt[i], sink.values[i][0]));
  return sol;
}

double eigen_mismatch(int n, double lambda, const Regularizer& reg, const BoundaryConditions& bc, double angleTol,
                      double scale) {
  PruferOptions opt;
  opt.tol = angleTol;
  opt.recordSteps = false;
  opt.scale = scale;
  const auto sol = integrate_theta(lambda, reg, bc, opt);
  double target = boundary_angle(sol.scale, bc.beta, f_at(reg, reg.spec.b));
  if (target == 0.0) target = kPi;
  return (sol.psiB + sol.scale * (reg.spec.b - reg.spec.a)) + (sol.thetaA - target - n * kPi);
}

EigenEstimate solve_eigenvalue(int n, const Regularizer& reg, const BoundaryConditions& bc, double tol) {
  if (n < 0) throw ValidationError("eigenvalue index must be non-negative");
  if (!(tol > 0.0) || tol >= 1.0) throw ValidationError("tol must lie in (0,1)");
  bc.validate();
  const double floorLambda = scale_floor(reg) * scale_floor(reg);
  auto D = [&](double lambda) {
    const double mu = std::sqrt(std::max(std::abs(lambda), floorLambda));
    return eigen_mismatch(n, lambda, reg, bc, angle_tolerance(tol, mu, reg), lambda > floorLambda ? 0.0 : mu);
  };

  double lo = zero_potential_guess(n, reg, bc);
  double hi = lo;
  double Dlo = D(lo);
  double Dhi = Dlo;
  if (Dlo > 0.0) {
    // Halve down to the scale floor, then step into lambda <= 0 with doubling strides.
    double stride = floorLambda;
    int k = 0;
    do {
      hi = lo;
      Dhi = Dlo;
      if (lo > 2.0 * floorLambda) {
        lo *= 0.5;
      } else {
        lo = std::min(lo, floorLambda) - stride;
        stride *= 2.0;
      }
      Dlo = D(lo);
      if (Dlo > Dhi + kPi) throw InconsistencyError("non-monotone mismatch while bracketing");
      if (++k > 120) throw BudgetExceeded("no bracket for eigenvalue " + std::to_string(n), lo);
    } while (Dlo > 0.0);
  } else {
    int k = 0;
    while (Dhi < 0.0) {
      lo = hi;
      Dlo = Dhi;
      hi *= 2.0;
      Dhi = D(hi);
      if (Dhi < Dlo - kPi) throw InconsistencyError("non-monotone mismatch while bracketing");
      if (++k > 80) throw BudgetExceeded("no bracket for eigenvalue " + std::to_string(n), hi);
    }
  }

  EigenEstimate est;
  est.n = n;
  est.method = EstimateMethod::ExactShooting;
  if (Dlo == 0.0 || Dhi == 0.0) {
    est.lambda = Dlo == 0.0 ? lo : hi;
    return est;
  }
  std::uintmax_t iters = 200;
  const double absFloor = tol * floorLambda;
  auto done = [tol, absFloor](double l, double h) { return h - l <= std::max(tol * 0.25 * std::min(std::abs(l), std::abs(h)), absFloor); };
  const auto root = boost::math::tools::toms748_solve(D, lo, hi, Dlo, Dhi, done, iters);
  if (iters >= 200) throw BudgetExceeded("eigenvalue root solve did not converge", 0.5 * (root.first + root.second),
                                         root.second - root.first);
  est.lambda = 0.5 * (root.first + root.second);
  est.residual = std::abs(D(est.lambda));
  return est;
}

}  // namespace sturm
