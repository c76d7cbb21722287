#pragma once

#include <string>

namespace sturm {

enum class EstimateMethod { ExactShooting, Asymptotic, Oracle, ClosedForm };

struct EigenEstimate {
  int n = 0;
  double lambda = 0.0;
  EstimateMethod method = EstimateMethod::ExactShooting;
  double residual = 0.0;
  int order = 0;  // expansion order N for asymptotic estimates, 0 otherwise

  /// "exact-shooting", "asymptotic-<N>", "oracle" or "closed-form".
  std::string methodTag() const {
    switch (method) {
      case EstimateMethod::ExactShooting: return "exact-shooting";
      case EstimateMethod::Asymptotic: return "asymptotic-" + std::to_string(order);
      case EstimateMethod::Oracle: return "oracle";
      case EstimateMethod::ClosedForm: return "closed-form";
    }
    return "unknown";
  }
};

}  // namespace sturm
