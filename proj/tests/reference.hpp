#pragma once

// Test-only reference integrators, deliberately independent of the library's steppers and meshes.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace sturm::testing {

/// Breakpoints of a fixed mesh on [a, b] (a < 0 < b): uniform away from 0, geometric octaves
/// inside (-|a|/4, b/4) down to `cutoff`. -cutoff and cutoff are consecutive entries; the
/// integrators freeze the state across that interval.
inline std::vector<double> graded_breakpoints(double a, double b, double stepsPerUnit, int stepsPerOctave,
                                              double cutoff) {
  // increasing points in [cutoff, L]
  auto side = [&](double L) {
    const double d = L / 4.0;
    std::vector<double> octaves;
    for (double hi = d; hi > cutoff; hi *= 0.5) octaves.push_back(hi);
    std::vector<double> p{cutoff};
    auto fill = [&](double hi, int m) {
      const double lo = p.back();
      for (int i = 1; i <= m; ++i) p.push_back(i == m ? hi : lo + (hi - lo) * i / m);
    };
    for (auto it = octaves.rbegin(); it != octaves.rend(); ++it)
      fill(*it, std::max(stepsPerOctave, static_cast<int>(std::ceil((*it - p.back()) * stepsPerUnit))));
    fill(L, std::max(1, static_cast<int>(std::ceil((L - d) * stepsPerUnit))));
    return p;
  };
  const std::vector<double> left = side(-a), right = side(b);
  std::vector<double> pts;
  for (auto it = left.rbegin(); it != left.rend(); ++it) pts.push_back(-*it);
  pts.insert(pts.end(), right.begin(), right.end());
  return pts;
}

/// Classical RK4 with one step per mesh interval; the interval (-cutoff, cutoff) is skipped.
template <std::size_t D>
std::array<double, D> rk4_fixed(const std::function<void(double, const std::array<double, D>&,
                                                         std::array<double, D>&)>& rhs,
                                std::array<double, D> y, const std::vector<double>& pts, double cutoff) {
  std::array<double, D> k1{}, k2{}, k3{}, k4{}, t{};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double x = pts[i], h = pts[i + 1] - pts[i];
    if (x == -cutoff && pts[i + 1] == cutoff) continue;
    rhs(x, y, k1);
    for (std::size_t k = 0; k < D; ++k) t[k] = y[k] + 0.5 * h * k1[k];
    rhs(x + 0.5 * h, t, k2);
    for (std::size_t k = 0; k < D; ++k) t[k] = y[k] + 0.5 * h * k2[k];
    rhs(x + 0.5 * h, t, k3);
    for (std::size_t k = 0; k < D; ++k) t[k] = y[k] + h * k3[k];
    rhs(x + h, t, k4);
    for (std::size_t k = 0; k < D; ++k) y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  }
  return y;
}

/// int_lo^hi g by tanh-sinh on `pieces` equal subintervals; endpoint singularities allowed.
inline double tanh_sinh_pieces(const std::function<double(double)>& g, double lo, double hi, int pieces,
                               double tol) {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double sum = 0.0;
  for (int i = 0; i < pieces; ++i) {
    const double u = lo + (hi - lo) * i / pieces;
    const double v = i + 1 == pieces ? hi : lo + (hi - lo) * (i + 1) / pieces;
    sum += rule.integrate(g, u, v, tol);
  }
  return sum;
}

}  // namespace sturm::testing
