#include "sturm/potential.hpp"

#include <algorithm>
#include <cmath>

#include "sturm/error.hpp"
#include "sturm/quadrature.hpp"

namespace sturm {

namespace {

constexpr double kPowerTol = 1e-12;

double int_pow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace

void PotentialSpec::validate() const {
  if (!std::isfinite(C)) throw ValidationError("C must be finite");
  if (!std::isfinite(K) || !(K >= 1.0 && K < 2.0)) throw ValidationError("K out of range [1,2)");
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) throw ValidationError("interval requires a < b");
  if (C != 0.0 && !(a < 0.0 && 0.0 < b))
    throw ValidationError("singular problem requires a < 0 < b");
}

double PotentialSpec::q(double x) const {
  if (C == 0.0) return 0.0;
  if (x == 0.0) throw DomainError("q is singular at x = 0");
  return C * std::pow(std::abs(x), -K);
}

double PowerLogTerm::eval(double x) const {
  if (x == 0.0) throw DomainError("power-log term evaluated at x = 0");
  const double ax = std::abs(x);
  double v = coeff;
  if (signPower % 2 != 0 && x < 0.0) v = -v;
  if (power != 0.0) v *= std::pow(ax, power);
  if (logPower != 0) v *= int_pow(std::log(ax), logPower);
  return v;
}

namespace terms {

TermSum simplify(TermSum t) {
  for (auto& term : t)
    if (std::abs(term.power - std::round(term.power)) <= kPowerTol) term.power = std::round(term.power);
  std::sort(t.begin(), t.end(), [](const PowerLogTerm& l, const PowerLogTerm& r) {
    if (l.signPower != r.signPower) return l.signPower < r.signPower;
    if (l.logPower != r.logPower) return l.logPower < r.logPower;
    return l.power < r.power;
  });
  TermSum out;
  for (const auto& term : t) {
    if (!out.empty() && out.back().signPower == term.signPower && out.back().logPower == term.logPower &&
        std::abs(out.back().power - term.power) <= kPowerTol) {
      out.back().coeff += term.coeff;
    } else {
      out.push_back(term);
    }
  }
  std::erase_if(out, [](const PowerLogTerm& term) { return term.coeff == 0.0; });
  std::sort(out.begin(), out.end(), [](const PowerLogTerm& l, const PowerLogTerm& r) {
    if (l.power != r.power) return l.power < r.power;
    if (l.logPower != r.logPower) return l.logPower > r.logPower;
    return l.signPower < r.signPower;
  });
  return out;
}

TermSum add(const TermSum& l, const TermSum& r) {
  TermSum out = l;
  out.insert(out.end(), r.begin(), r.end());
  return simplify(std::move(out));
}

TermSum scale(const TermSum& t, double factor) {
  TermSum out = t;
  for (auto& term : out) term.coeff *= factor;
  return simplify(std::move(out));
}

TermSum multiply(const TermSum& l, const TermSum& r) {
  TermSum out;
  out.reserve(l.size() * r.size());
  for (const auto& x : l)
    for (const auto& y : r)
      out.push_back({x.coeff * y.coeff, (x.signPower + y.signPower) % 2, x.power + y.power,
                     x.logPower + y.logPower});
  return simplify(std::move(out));
}

TermSum derivative(const TermSum& t) {
  TermSum out;
  for (const auto& term : t) {
    const int sp = (term.signPower + 1) % 2;
    if (term.power != 0.0) out.push_back({term.coeff * term.power, sp, term.power - 1.0, term.logPower});
    if (term.logPower > 0)
      out.push_back({term.coeff * term.logPower, sp, term.power - 1.0, term.logPower - 1});
  }
  return simplify(std::move(out));
}

TermSum antiderivative(const TermSum& t) {
  TermSum out;
  for (const auto& term : t) {
    const int sp = (term.signPower + 1) % 2;
    const double q = term.power + 1.0;
    const int r = term.logPower;
    if (std::abs(q) <= kPowerTol) {
      out.push_back({term.coeff / (r + 1), sp, 0.0, r + 1});
      continue;
    }
    double falling = 1.0;
    double qpow = q;
    for (int k = 0; k <= r; ++k) {
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      out.push_back({term.coeff * sign * falling / qpow, sp, q, r - k});
      falling *= static_cast<double>(r - k);
      qpow *= q;
    }
  }
  return simplify(std::move(out));
}

double evaluate(const TermSum& t, double x) {
  if (x == 0.0) throw DomainError("term sum evaluated at x = 0");
  const double ax = std::abs(x);
  const double L = std::log(ax);
  double sum = 0.0;
  for (const auto& term : t) {
    double v = term.coeff;
    if (term.signPower % 2 != 0 && x < 0.0) v = -v;
    if (term.power != 0.0) v *= std::pow(ax, term.power);
    if (term.logPower != 0) v *= int_pow(L, term.logPower);
    sum += v;
  }
  return sum;
}

double integral(const TermSum& t, double u, double v) {
  if (t.empty() || u == v) return 0.0;
  const bool crossesZero = u <= 0.0 && v >= 0.0;
  if (crossesZero)
    for (const auto& term : t)
      if (!(term.power > -1.0 + kPowerTol))
        throw DomainError("integral across 0 of a non-integrable term");
  const TermSum A = antiderivative(t);
  auto at = [&](double x) { return x == 0.0 ? 0.0 : evaluate(A, x); };
  return at(v) - at(u);
}

double abs_mass_near_zero(const TermSum& t, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("abs_mass_near_zero requires 0 < eps < 1");
  double mass = 0.0;
  for (const auto& term : t) {
    if (!(term.power > -1.0 + kPowerTol)) return std::numeric_limits<double>::infinity();
    mass += 2.0 * std::abs(term.coeff) * std::abs(power_log_integral_from_zero(term.power, term.logPower, eps));
  }
  return mass;
}

Order leading(const TermSum& t) {
  Order o;
  for (const auto& term : t) {
    if (term.power < o.power - kPowerTol) {
      o.power = term.power;
      o.logPower = term.logPower;
    } else if (std::abs(term.power - o.power) <= kPowerTol) {
      o.logPower = std::max(o.logPower, term.logPower);
    }
  }
  return o;
}

}  // namespace terms

constexpr int kMaxChainDepth = 8;

int chain_depth(double K) {
  for (int m = 1; m < 100000; ++m)
    if (2.0 * m - (m + 1.0) * K > -1.0 + kPowerTol) return m;
  throw ValidationError("K out of range [1,2)");
}

Regularizer build_regularizer(const PotentialSpec& spec, RegularizerForm form, int depth) {
  spec.validate();
  Regularizer reg;
  reg.spec = spec;
  reg.form = form;
  reg.chainDepth = chain_depth(spec.K);
  if (depth < 0) throw ValidationError("chain depth must be >= 0");
  if (depth > 0 && depth < reg.chainDepth)
    throw ValidationError("chain depth " + std::to_string(depth) + " leaves F non-integrable for this K");
  // The singular form discards the positive powers that a deeper chain adds, which undoes it.
  if (depth > reg.chainDepth && form != RegularizerForm::Chain)
    throw ValidationError("a chain depth above the minimum requires the chain form");
  if (depth > kMaxChainDepth) throw ValidationError("chain depth above " + std::to_string(kMaxChainDepth));
  if (depth > 0) reg.chainDepth = depth;
  if (spec.C == 0.0) {
    reg.chainDepth = 1;
    return reg;
  }
  const TermSum minusQ{{-spec.C, 0, -spec.K, 0}};
  // f_1 = A(-q); F_m = g_m (f_m + f_{m-1}); g_{m+1} = A(F_m); f_{m+1} = f_m + g_{m+1}.
  TermSum f = terms::antiderivative(minusQ);
  TermSum fPrev;
  TermSum g = f;
  TermSum F = terms::multiply(g, terms::add(f, fPrev));
  // Powers only grow along the chain, so the singular form can prune as it goes: an F term with
  // power > -1 integrates to a positive power, which it drops anyway.
  const bool prune = form == RegularizerForm::Singular;
  auto positive = [](const PowerLogTerm& t) { return t.power > 1e-12; };
  for (int m = 1; m < reg.chainDepth; ++m) {
    if (prune) std::erase_if(F, [](const PowerLogTerm& t) { return t.power > -1.0 + 1e-12; });
    g = terms::antiderivative(F);
    fPrev = f;
    f = terms::add(f, g);
    if (prune) {
      std::erase_if(f, positive);
      std::erase_if(fPrev, positive);
      std::erase_if(g, positive);
    }
    F = terms::multiply(g, terms::add(f, fPrev));
  }
  if (form == RegularizerForm::Singular) {
    // Terms of f with positive power have integrable derivatives; dropping them keeps F in L1.
    std::erase_if(f, positive);
    const TermSum square = terms::multiply(f, f);
    const TermSum slope = terms::derivative(f);
    double scale = spec.C == 0.0 ? 0.0 : std::abs(spec.C);
    for (const auto& t : square) scale = std::max(scale, std::abs(t.coeff));
    for (const auto& t : slope) scale = std::max(scale, std::abs(t.coeff));
    TermSum full = terms::add(terms::add(square, terms::scale(slope, -1.0)), minusQ);
    // Non-integrable powers cancel exactly; what survives is rounding.
    F.clear();
    for (const auto& t : full) {
      if (t.integrableAtZero()) {
        F.push_back(t);
      } else if (std::abs(t.coeff) > 1e-10 * scale) {
        throw InconsistencyError("singular regularizer leaves a non-integrable term in F");
      }
    }
  }
  reg.fTerms = std::move(f);
  reg.FTerms = std::move(F);
  for (const auto& term : reg.fTerms)
    if (!term.integrableAtZero()) throw InconsistencyError("regularizer f has a non-integrable term");
  for (const auto& term : reg.FTerms)
    if (!term.integrableAtZero()) throw InconsistencyError("regularizer F has a non-integrable term");
  return reg;
}

namespace {
void check_point(const Regularizer& reg, double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite evaluation point");
  if (x == 0.0 && !(reg.fTerms.empty() && reg.FTerms.empty()))
    throw DomainError("f and F are undefined at x = 0");
  if (x < reg.spec.a || x > reg.spec.b) throw DomainError("evaluation point outside [a, b]");
}
}  // namespace

double eval_f(const Regularizer& reg, double x) {
  check_point(reg, x);
  return terms::evaluate(reg.fTerms, x);
}

double eval_F(const Regularizer& reg, double x) {
  check_point(reg, x);
  return terms::evaluate(reg.FTerms, x);
}

double eval_f_prime(const Regularizer& reg, double x) {
  check_point(reg, x);
  return terms::evaluate(terms::derivative(reg.fTerms), x);
}

Coefficients eval_coefficients(const Regularizer& reg, double x) {
  if (reg.fTerms.empty() && reg.FTerms.empty()) return {0.0, 0.0};
  if (x == 0.0) throw DomainError("f and F are undefined at x = 0");
  const double ax = std::abs(x);
  const double L = std::log(ax);
  auto sum = [&](const TermSum& t) {
    double s = 0.0;
    for (const auto& term : t) {
      double v = term.coeff;
      if (term.signPower % 2 != 0 && x < 0.0) v = -v;
      if (term.power != 0.0) v *= std::pow(ax, term.power);
      if (term.logPower != 0) v *= int_pow(L, term.logPower);
      s += v;
    }
    return s;
  };
  return {sum(reg.fTerms), sum(reg.FTerms)};
}

double singular_gap(const Regularizer& reg, double massBudget, double weightF) {
  double eps = 1e-14 * (reg.spec.b - reg.spec.a);
  if (reg.fTerms.empty() && reg.FTerms.empty()) return eps;
  eps = std::min(eps, 0.5);
  auto mass = [&](double e) {
    return terms::abs_mass_near_zero(reg.fTerms, e) + weightF * terms::abs_mass_near_zero(reg.FTerms, e);
  };
  while (mass(eps) > massBudget && eps > 1e-280) eps *= 0.5;
  return eps;
}

double xi(const Regularizer& reg, int j, double t, double tol) {
  if (j < 1) throw ValidationError("xi requires j >= 1");
  if (t < reg.spec.a || t > reg.spec.b) throw DomainError("xi: t outside [a, b]");
  if (t == 0.0 || (reg.fTerms.empty() && reg.FTerms.empty())) return 0.0;

  const double gap = singular_gap(reg, tol / 4.0);
  const double L = std::abs(t);
  double xi1;
  if (L <= gap) {
    xi1 = 0.5 * (terms::abs_mass_near_zero(reg.fTerms, L) + terms::abs_mass_near_zero(reg.FTerms, L));
  } else {
    auto w = [&](double s) {
      const auto c = eval_coefficients(reg, s);
      return std::abs(c.f) + std::abs(c.F);
    };
    QuadratureSettings qs;
    qs.tol = tol;
    qs.innerCutoff = gap;
    const double x0 = std::min(0.0, t);
    const double x1 = std::max(0.0, t);
    const double body = integrate_singular(w, x0, x1, qs).value;
    const double tail =
        0.5 * (terms::abs_mass_near_zero(reg.fTerms, gap) + terms::abs_mass_near_zero(reg.FTerms, gap));
    xi1 = body + tail;
  }
  // d/dt xi_j = w xi_{j-1} with xi_1' = w on each side, hence xi_j = xi_1^j / j!.
  double value = xi1;
  for (int k = 2; k <= j; ++k) value *= xi1 / k;
  return value;
}

ConditionReport check_conditions(const Regularizer& reg, int N) {
  if (N < 1) throw ValidationError("order N must be >= 1");
  using terms::Order;
  ConditionReport report;
  report.order = N;

  const Order fO = terms::leading(reg.fTerms);
  const Order FO = terms::leading(reg.FTerms);
  const Order fpO = terms::leading(terms::derivative(reg.fTerms));

  auto product = [](Order l, Order r) {
    if (l.empty() || r.empty()) return Order{};
    return Order{l.power + r.power, l.logPower + r.logPower};
  };
  auto weaker = [](Order l, Order r) {  // the more singular of the two
    if (l.empty()) return r;
    if (r.empty()) return l;
    if (l.power < r.power - kPowerTol) return l;
    if (r.power < l.power - kPowerTol) return r;
    return Order{l.power, std::max(l.logPower, r.logPower)};
  };
  auto integrable = [](Order o) { return o.empty() || o.power > -1.0 + kPowerTol; };
  auto vanishes = [](Order o) { return o.empty() || o.power > kPowerTol; };

  auto record = [&](const std::string& name, Order o, bool needVanish) {
    const bool ok = needVanish ? vanishes(o) : integrable(o);
    report.witnesses.push_back({name, o.power, o.logPower, needVanish ? "-> 0" : "integrable", ok});
    if (!ok && report.holds) {
      report.holds = false;
      report.failing = name;
    }
  };

  record("f", fO, false);
  record("F", FO, false);
  const Order wO = weaker(fO, FO);
  auto xiOrder = [&](int j) {
    if (wO.empty()) return Order{};
    return Order{j * (wO.power + 1.0), j * wO.logPower};
  };
  record("f'*xi_" + std::to_string(N + 1), product(fpO, xiOrder(N + 1)), false);
  record("f^2*xi_" + std::to_string(N), product(product(fO, fO), xiOrder(N)), false);
  record("f*F*xi_" + std::to_string(N), product(product(fO, FO), xiOrder(N)), false);
  record("f*xi_" + std::to_string(N + 1), product(fO, xiOrder(N + 1)), true);
  return report;
}

nlohmann::json to_json(const PowerLogTerm& t) {
  return {{"coeff", t.coeff}, {"signPower", t.signPower}, {"power", t.power}, {"logPower", t.logPower}};
}

nlohmann::json to_json(const Regularizer& reg) {
  nlohmann::json fj = nlohmann::json::array();
  nlohmann::json Fj = nlohmann::json::array();
  for (const auto& t : reg.fTerms) fj.push_back(to_json(t));
  for (const auto& t : reg.FTerms) Fj.push_back(to_json(t));
  return {{"spec", {{"C", reg.spec.C}, {"K", reg.spec.K}, {"a", reg.spec.a}, {"b", reg.spec.b}}},
          {"chainDepth", reg.chainDepth},
          {"fTerms", fj},
          {"FTerms", Fj}};
}

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& c : report.witnesses) {
    nlohmann::json e = {{"product", c.product}, {"logPower", c.logPower}, {"requirement", c.requirement},
                        {"ok", c.ok}};
    if (std::isinf(c.exponent))
      e["exponent"] = "inf";
    else
      e["exponent"] = c.exponent;
    w.push_back(e);
  }
  return {{"holds", report.holds}, {"order", report.order}, {"failing", report.failing}, {"witnesses", w}};
}

}  // namespace sturm
