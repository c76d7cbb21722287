#pragma once

#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace sturm {

/// Problem instance for -y'' + C|x|^-K y = lambda y on [a, b].
struct PotentialSpec {
  double C = 0.0;
  double K = 1.0;
  double a = -1.0;
  double b = 1.0;

  /// Throws ValidationError unless 1 <= K < 2, a < b, C finite, and a < 0 < b when C != 0.
  void validate() const;
  double q(double x) const;
};

/// coeff * sign(x)^signPower * |x|^power * ln^logPower|x|
struct PowerLogTerm {
  double coeff = 0.0;
  int signPower = 0;
  double power = 0.0;
  int logPower = 0;

  double eval(double x) const;
  bool integrableAtZero() const noexcept { return power > -1.0; }
};

using TermSum = std::vector<PowerLogTerm>;

namespace terms {

/// Merges like terms (same sign power, log power, and power within 1e-12) and drops zeros.
TermSum simplify(TermSum t);
TermSum add(const TermSum& l, const TermSum& r);
TermSum scale(const TermSum& t, double factor);
TermSum multiply(const TermSum& l, const TermSum& r);
TermSum derivative(const TermSum& t);
/// Canonical antiderivative without constant. For power > -1 it vanishes at 0.
TermSum antiderivative(const TermSum& t);
double evaluate(const TermSum& t, double x);
/// Exact integral over [u, v]; requires every power > -1 when [u, v] contains 0.
double integral(const TermSum& t, double u, double v);
/// Upper bound for the integral of |t| over [-eps, eps] (eps < 1), exact for single-signed terms.
double abs_mass_near_zero(const TermSum& t, double eps);

/// |x|^power |ln|x||^logPower behaviour as x -> 0; empty sums have infinite power.
struct Order {
  double power = std::numeric_limits<double>::infinity();
  int logPower = 0;
  bool empty() const noexcept { return power == std::numeric_limits<double>::infinity(); }
};
Order leading(const TermSum& t);

}  // namespace terms

/// Chain: f = f_M exactly. Singular: f_M without its positive-power terms, F recomputed from it.
/// Both satisfy F = f^2 - f' - q with f, F integrable; Singular keeps coefficients small for large K.
enum class RegularizerForm { Singular, Chain };

/// f and F with -F = q - f^2 + f', built as a closed-form chain of depth chainDepth.
struct Regularizer {
  PotentialSpec spec;
  RegularizerForm form = RegularizerForm::Singular;
  TermSum fTerms;
  TermSum FTerms;
  int chainDepth = 1;
};

/// Least m >= 1 with 2m - (m+1)K > -1.
int chain_depth(double K);

/// depth 0 selects chain_depth(K). A larger depth (at most 8, Chain form only) raises F's leading
/// exponent by 2 - K per step.
Regularizer build_regularizer(const PotentialSpec& spec, RegularizerForm form = RegularizerForm::Singular,
                              int depth = 0);

double eval_f(const Regularizer& reg, double x);
double eval_F(const Regularizer& reg, double x);
/// Symbolic derivative of f.
double eval_f_prime(const Regularizer& reg, double x);

/// f and F at x sharing one logarithm; x must be non-zero.
struct Coefficients {
  double f;
  double F;
};
Coefficients eval_coefficients(const Regularizer& reg, double x);

/// Half-width eps of the neighbourhood of 0 whose |f| + weightF |F| mass is below budget,
/// never larger than 1e-14 (b - a).
double singular_gap(const Regularizer& reg, double massBudget, double weightF = 1.0);

/// xi_1(t) = |int_0^t |f| + |F||, xi_j(t) = |int_0^t (|f| + |F|) xi_{j-1}|.
double xi(const Regularizer& reg, int j, double t, double tol = 1e-12);

struct ConditionWitness {
  std::string product;
  double exponent;  // leading power of |x| near 0 (infinity when the product vanishes)
  int logPower;
  std::string requirement;  // "integrable" or "-> 0"
  bool ok;
};

struct ConditionReport {
  bool holds = true;
  int order = 1;
  std::vector<ConditionWitness> witnesses;
  std::string failing;  // first failing product, empty when holds
};

ConditionReport check_conditions(const Regularizer& reg, int N);

nlohmann::json to_json(const PowerLogTerm& t);
nlohmann::json to_json(const Regularizer& reg);
nlohmann::json to_json(const ConditionReport& report);

}  // namespace sturm
