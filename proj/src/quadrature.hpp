#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

namespace gmrf::detail {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * z * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[k] = -z;
    x[n - 1 - k] = z;
    w[k] = w[n - 1 - k] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Adaptive bisection with a fixed Gauss-Legendre rule per panel. A panel is
// accepted when its estimate agrees with the sum over its two halves.
template <class F>
double adaptive_gauss_legendre(F&& f, double a, double b, double rel_tol, int max_depth = 40) {
  static const auto rule = gauss_legendre(20);
  auto panel = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.first.size(); ++k) s += rule.second[k] * f(mid + half * rule.first[k]);
    return s * half;
  };
  struct Rec {
    F& f;
    decltype(panel)& pan;
    double tol;
    int max_depth;
    double go(double lo, double hi, double whole, double total_scale, int depth) {
      const double mid = 0.5 * (lo + hi);
      const double left = pan(lo, mid), right = pan(mid, hi);
      const double err = std::abs(left + right - whole);
      const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
      if (depth >= max_depth || err <= std::max(tol * std::abs(total_scale), floor)) return left + right;
      return go(lo, mid, left, total_scale, depth + 1) + go(mid, hi, right, total_scale, depth + 1);
    }
  };
  const double whole = panel(a, b);
  Rec rec{f, panel, rel_tol, max_depth};
  return rec.go(a, b, whole, std::abs(whole) > 0 ? whole : 1.0, 0);
}

}  // namespace gmrf::detail
