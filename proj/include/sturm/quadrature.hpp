#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace sturm {

/// Compensated (Neumaier) running sum. Deterministic for a fixed summation order.
class NeumaierSum {
 public:
  void add(double v) noexcept {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Leading behaviour g(x) ~ A |x|^power ln^logPower|x| of an integrand at 0.
struct SingularHint {
  double power = 0.0;
  int logPower = 0;
};

struct QuadratureSettings {
  double tol = 1e-10;                // absolute tolerance
  std::size_t maxPanels = 1u << 22;
  double gradingRatio = 0.5;         // geometric refinement toward 0
  double oscillationScale = 0.0;     // omega; 0 = non-oscillatory
  double panelsPerPeriod = 4.0;      // panel width <= 2 pi / (panelsPerPeriod * omega)
  double innerCutoff = 0.0;          // excluded half-width around 0; 0 = 1e-14 (x1 - x0)
  std::optional<SingularHint> hint;  // enables the analytic tail over the excluded piece

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double errorEstimate = 0.0;
  std::size_t panels = 0;
  std::size_t evaluations = 0;
};

/// Integrates g over [x0, x1] where g may carry an integrable singularity at 0
/// and oscillate on the scale `oscillationScale`. g is never evaluated at 0.
/// Throws BudgetExceeded (carrying the best value) when maxPanels is reached.
QuadratureResult integrate_singular(const std::function<double(double)>& g, double x0, double x1,
                                    const QuadratureSettings& settings);

/// Integral of t^p ln^r t over (0, X] for p > -1, X > 0.
double power_log_integral_from_zero(double p, int r, double X);

// ---------------------------------------------------------------------------
// Fixed panel meshes with Gauss-Legendre nodes.

struct Panel {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const noexcept { return 0.5 * (lo + hi); }
  double halfWidth() const noexcept { return 0.5 * (hi - lo); }
};

struct MeshOptions {
  double gradingRatio = 0.5;
  double gap = 0.0;  // half-width of the excluded neighbourhood of 0 (required when 0 is in range)
  double panelCap = std::numeric_limits<double>::infinity();
  double oscillationScale = 0.0;
  double panelsPerPeriod = 2.0;
};

/// Panels covering [x0, x1] minus the excluded neighbourhood of 0, graded
/// geometrically toward 0 and capped in width. Panels are sorted and contiguous
/// except across the gap.
struct PanelMesh {
  std::vector<Panel> panels;
  bool hasGap = false;
  double gapLo = 0.0;
  double gapHi = 0.0;
  std::size_t panelsBeforeGap = 0;  // index of the first panel right of the gap
};

PanelMesh build_mesh(double x0, double x1, const MeshOptions& options);

/// 16-point Gauss-Legendre rule on [-1, 1] with its spectral integration matrix.
struct GaussLegendre {
  static constexpr std::size_t n = 16;
  std::array<double, n> nodes{};
  std::array<double, n> weights{};
  std::array<double, n> bary{};
  /// integration[i][j] = integral over [-1, nodes[i]] of the j-th Lagrange basis polynomial
  std::array<std::array<double, n>, n> integration{};

  static const GaussLegendre& instance();

  /// Barycentric interpolation of nodal values at t in [-1, 1].
  double interpolate(std::span<const double> values, double t) const;
};

}  // namespace sturm
