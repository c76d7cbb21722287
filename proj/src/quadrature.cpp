#include "sturm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>

#include "sturm/error.hpp"

namespace sturm {

namespace {

// Kronrod 15-point abscissae/weights with the embedded 7-point Gauss weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double lo;
  double hi;
  double value;
  double error;
  bool splittable;
};

struct ByError {
  bool operator()(const PanelEstimate& l, const PanelEstimate& r) const { return l.error < r.error; }
};

PanelEstimate gauss_kronrod15(const std::function<double(double)>& g, double lo, double hi,
                              std::size_t& evaluations) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  std::array<double, 15> fv{};
  const double fc = g(center);
  double resk = kWgk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = kWgk[7] * std::abs(fc);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  fv[14] = fc;
  evaluations += 15;

  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));

  const double absHalf = std::abs(half);
  double err = std::abs((resk - resg) * half);
  resasc *= absHalf;
  resabs *= absHalf;
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * resabs;
  const bool roundoffLimited = err <= roundoff;
  err = std::max(err, roundoff);

  if (!std::isfinite(resk)) throw InconsistencyError("integrand produced a non-finite value");
  const bool tooNarrow = (hi - lo) <= 1e3 * std::numeric_limits<double>::epsilon() *
                                          std::max(std::abs(lo), std::abs(hi));
  return {lo, hi, resk * half, err, !(roundoffLimited || tooNarrow)};
}

// Distances from 0 in decreasing order: length, r*length, ..., eps.
std::vector<double> graded_breakpoints(double length, double eps, double ratio) {
  std::vector<double> d{length};
  while (d.back() * ratio > eps * (1.0 + 1e-9)) d.push_back(d.back() * ratio);
  if (d.back() > eps) d.push_back(eps);
  return d;
}

void append_capped(std::vector<Panel>& out, double lo, double hi, double cap) {
  const double width = hi - lo;
  std::size_t pieces = 1;
  if (std::isfinite(cap) && width > cap) pieces = static_cast<std::size_t>(std::ceil(width / cap));
  for (std::size_t k = 0; k < pieces; ++k) {
    const double l = (k == 0) ? lo : lo + width * static_cast<double>(k) / static_cast<double>(pieces);
    const double h = (k + 1 == pieces) ? hi : lo + width * static_cast<double>(k + 1) / static_cast<double>(pieces);
    out.push_back({l, h});
  }
}

// Panels on [eps, length] (side = +1) or [-length, -eps] (side = -1), sorted by x.
void append_side(std::vector<Panel>& out, double length, double eps, double ratio, double cap, int side) {
  if (length <= eps) return;
  const auto d = graded_breakpoints(length, eps, ratio);
  std::vector<Panel> sidePanels;
  for (std::size_t k = d.size() - 1; k > 0; --k) append_capped(sidePanels, d[k], d[k - 1], cap);
  if (side > 0) {
    out.insert(out.end(), sidePanels.begin(), sidePanels.end());
  } else {
    for (auto it = sidePanels.rbegin(); it != sidePanels.rend(); ++it) out.push_back({-it->hi, -it->lo});
  }
}

}  // namespace

void QuadratureSettings::validate() const {
  if (!(tol > 0.0)) throw ValidationError("quadrature tol must be > 0");
  if (!(gradingRatio > 0.0 && gradingRatio < 1.0)) throw ValidationError("gradingRatio must lie in (0,1)");
  if (maxPanels < 8) throw ValidationError("maxPanels must be >= 8");
  if (!(oscillationScale >= 0.0) || !std::isfinite(oscillationScale))
    throw ValidationError("oscillationScale must be finite and >= 0");
  if (!(panelsPerPeriod >= 1.0)) throw ValidationError("panelsPerPeriod must be >= 1");
  if (!(innerCutoff >= 0.0)) throw ValidationError("innerCutoff must be >= 0");
}

double power_log_integral_from_zero(double p, int r, double X) {
  if (!(p > -1.0)) throw DomainError("power_log_integral_from_zero requires p > -1");
  if (!(X > 0.0)) return 0.0;
  const double L = std::log(X);
  const double q = p + 1.0;
  double sum = 0.0;
  double falling = 1.0;  // r!/(r-k)!
  double qpow = q;       // q^(k+1)
  for (int k = 0; k <= r; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * falling * std::pow(L, r - k) / qpow;
    falling *= static_cast<double>(r - k);
    qpow *= q;
  }
  return std::pow(X, q) * sum;
}

PanelMesh build_mesh(double x0, double x1, const MeshOptions& options) {
  if (!(x0 < x1)) throw ValidationError("build_mesh requires x0 < x1");
  if (!(options.gradingRatio > 0.0 && options.gradingRatio < 1.0))
    throw ValidationError("gradingRatio must lie in (0,1)");
  double cap = options.panelCap;
  if (options.oscillationScale > 0.0)
    cap = std::min(cap, 2.0 * std::numbers::pi / (options.panelsPerPeriod * options.oscillationScale));

  PanelMesh mesh;
  const bool touchesZero = x0 <= 0.0 && x1 >= 0.0;
  if (!touchesZero) {
    append_capped(mesh.panels, x0, x1, cap);
    mesh.panelsBeforeGap = mesh.panels.size();
    return mesh;
  }
  if (!(options.gap > 0.0)) throw ValidationError("a positive gap is required when the range touches 0");
  mesh.hasGap = true;
  mesh.gapLo = std::max(x0, -options.gap);
  mesh.gapHi = std::min(x1, options.gap);
  if (x0 < 0.0) append_side(mesh.panels, -x0, options.gap, options.gradingRatio, cap, -1);
  mesh.panelsBeforeGap = mesh.panels.size();
  if (x1 > 0.0) append_side(mesh.panels, x1, options.gap, options.gradingRatio, cap, +1);
  // Pin the outer ends exactly.
  if (!mesh.panels.empty()) {
    if (x0 < -options.gap) mesh.panels.front().lo = x0;
    if (x1 > options.gap) mesh.panels.back().hi = x1;
  }
  return mesh;
}

QuadratureResult integrate_singular(const std::function<double(double)>& g, double x0, double x1,
                                    const QuadratureSettings& settings) {
  settings.validate();
  if (!(x0 <= x1)) throw ValidationError("integrate_singular requires x0 <= x1");
  QuadratureResult out;
  if (x0 == x1) return out;

  const double eps = settings.innerCutoff > 0.0 ? settings.innerCutoff : 1e-14 * (x1 - x0);
  MeshOptions mo;
  mo.gradingRatio = settings.gradingRatio;
  mo.gap = eps;
  mo.panelCap = (x1 - x0) / 8.0;
  mo.oscillationScale = settings.oscillationScale;
  mo.panelsPerPeriod = settings.panelsPerPeriod;
  const PanelMesh mesh = build_mesh(x0, x1, mo);
  std::priority_queue<PanelEstimate, std::vector<PanelEstimate>, ByError> active;
  std::vector<PanelEstimate> finished;
  double totalError = 0.0;
  for (const auto& p : mesh.panels) {
    auto est = gauss_kronrod15(g, p.lo, p.hi, out.evaluations);
    totalError += est.error;
    if (est.splittable)
      active.push(est);
    else
      finished.push_back(est);
  }
  std::size_t panelCount = mesh.panels.size();

  auto collect = [&]() {
    std::vector<PanelEstimate> all = finished;
    auto copy = active;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    std::sort(all.begin(), all.end(), [](const auto& l, const auto& r) { return l.lo < r.lo; });
    NeumaierSum value;
    NeumaierSum error;
    for (const auto& e : all) {
      value.add(e.value);
      error.add(e.error);
    }
    return std::pair{value.value(), error.value()};
  };

  while (totalError > settings.tol && !active.empty()) {
    if (panelCount >= settings.maxPanels) {
      auto [v, e] = collect();
      throw BudgetExceeded("integrate_singular: maxPanels reached before tolerance (best value " +
                               std::to_string(v) + ", estimate " + std::to_string(e) + ")",
                           v, e);
    }
    const PanelEstimate worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    auto left = gauss_kronrod15(g, worst.lo, mid, out.evaluations);
    auto right = gauss_kronrod15(g, mid, worst.hi, out.evaluations);
    totalError += left.error + right.error - worst.error;
    for (auto* half : {&left, &right}) {
      if (half->splittable)
        active.push(*half);
      else
        finished.push_back(*half);
    }
    ++panelCount;
    // Re-synchronise the running error to avoid drift from repeated subtraction.
    if (panelCount % 4096 == 0) totalError = collect().second;
  }

  auto [value, error] = collect();

  // Excluded pieces adjacent to 0.
  if (mesh.hasGap) {
    NeumaierSum tail;
    double tailError = 0.0;
    for (int side : {-1, +1}) {
      const double piece = side < 0 ? -mesh.gapLo : mesh.gapHi;
      if (!(piece > 0.0)) continue;
      const double gv = g(side * piece);
      const double gh = g(side * piece * 0.5);
      out.evaluations += 2;
      if (settings.hint) {
        const double p = settings.hint->power;
        const int r = settings.hint->logPower;
        auto model = [&](double x) { return std::pow(x, p) * std::pow(std::log(x), r); };
        const double t = gv / model(piece) * power_log_integral_from_zero(p, r, piece);
        tail.add(t);
        // misfit of the leading form between piece/2 and piece
        const double predicted = gv * model(0.5 * piece) / model(piece);
        const double misfit = gh == predicted ? 0.0 : std::abs(gh - predicted) / std::max(std::abs(gh), 1e-300);
        tailError += std::abs(t) * misfit + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t);
        continue;
      }
      // No hint: local exponents from g at piece, piece/2, piece/4; trust the power tail if they agree.
      const double gq = g(side * piece * 0.25);
      ++out.evaluations;
      const bool sameSign = gv != 0.0 && gh != 0.0 && gq != 0.0 && (gv > 0.0) == (gh > 0.0) && (gh > 0.0) == (gq > 0.0);
      if (sameSign) {
        const double p1 = std::log2(gv / gh);
        const double p2 = std::log2(gh / gq);
        if (p1 > -1.0 && p2 > -1.0 && std::abs(p1 - p2) < 0.1) {
          const double t1 = gv * piece / (p1 + 1.0);
          const double t2 = gh * std::exp2(p2) * piece / (p2 + 1.0);
          tail.add(t1);
          tailError += std::abs(t1 - t2) + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(t1);
          continue;
        }
      }
      tailError += std::abs(gv) * piece;
    }
    value += tail.value();
    error += tailError;
  }

  out.value = value;
  out.errorEstimate = error;
  out.panels = panelCount;
  return out;
}

// ---------------------------------------------------------------------------

const GaussLegendre& GaussLegendre::instance() {
  static const GaussLegendre rule = [] {
    GaussLegendre gl;
    constexpr std::size_t n = GaussLegendre::n;
    using ld = long double;
    auto legendre = [](std::size_t degree, ld x, ld& pPrev) {
      ld p0 = 1.0L;
      ld p1 = x;
      if (degree == 0) {
        pPrev = 0.0L;
        return p0;
      }
      for (std::size_t k = 2; k <= degree; ++k) {
        const ld p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / static_cast<ld>(k);
        p0 = p1;
        p1 = p2;
      }
      pPrev = p0;
      return p1;
    };
    std::array<ld, n> t{};
    std::array<ld, n> w{};
    for (std::size_t i = 0; i < n; ++i) {
      // Chebyshev-like initial guess, descending; stored ascending.
      ld x = std::cos(std::numbers::pi_v<ld> * (i + 0.75L) / (n + 0.5L));
      for (int it = 0; it < 100; ++it) {
        ld pm1;
        const ld p = legendre(n, x, pm1);
        const ld dp = n * (x * p - pm1) / (x * x - 1.0L);
        const ld dx = p / dp;
        x -= dx;
        if (std::abs(dx) < 1e-19L) break;
      }
      ld pm1;
      const ld p = legendre(n, x, pm1);
      const ld dp = n * (x * p - pm1) / (x * x - 1.0L);
      t[n - 1 - i] = x;
      w[n - 1 - i] = 2.0L / ((1.0L - x * x) * dp * dp);
    }
    // Integration matrix through the discrete Legendre expansion of each Lagrange basis function.
    std::array<std::array<ld, n + 1>, n> P{};  // P[i][k] = P_k(t_i), k = 0..n
    for (std::size_t i = 0; i < n; ++i) {
      P[i][0] = 1.0L;
      P[i][1] = t[i];
      for (std::size_t k = 2; k <= n; ++k)
        P[i][k] = ((2.0L * k - 1.0L) * t[i] * P[i][k - 1] - (k - 1.0L) * P[i][k - 2]) / static_cast<ld>(k);
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::array<ld, n> intP{};  // integral of P_k over [-1, t_i]
      intP[0] = t[i] + 1.0L;
      for (std::size_t k = 1; k < n; ++k) intP[k] = (P[i][k + 1] - P[i][k - 1]) / (2.0L * k + 1.0L);
      for (std::size_t j = 0; j < n; ++j) {
        ld s = 0.0L;
        for (std::size_t k = 0; k < n; ++k) s += (k + 0.5L) * P[j][k] * intP[k];
        gl.integration[i][j] = static_cast<double>(w[j] * s);
      }
    }
    ld maxBary = 0.0L;
    std::array<ld, n> bary{};
    for (std::size_t j = 0; j < n; ++j) {
      ld prod = 1.0L;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) prod *= (t[j] - t[k]);
      bary[j] = 1.0L / prod;
      maxBary = std::max(maxBary, std::abs(bary[j]));
    }
    for (std::size_t j = 0; j < n; ++j) {
      gl.nodes[j] = static_cast<double>(t[j]);
      gl.weights[j] = static_cast<double>(w[j]);
      gl.bary[j] = static_cast<double>(bary[j] / maxBary);
    }
    return gl;
  }();
  return rule;
}

double GaussLegendre::interpolate(std::span<const double> values, double t) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = t - nodes[j];
    if (d == 0.0) return values[j];
    const double c = bary[j] / d;
    num += c * values[j];
    den += c;
  }
  return num / den;
}

}  // namespace sturm
