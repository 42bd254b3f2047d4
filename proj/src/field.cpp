#include "gmrf/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmrf/error.hpp"
#include "gmrf/fft.hpp"
#include "quadrature.hpp"

namespace gmrf {

GmrfParams::GmrfParams(ThetaField theta, double sigma_sq)
    : theta_(std::move(theta)), sigma_sq_(sigma_sq), lam_(gmrf::precision_spectrum(theta_)) {
  if (!(sigma_sq_ > 0.0) || !std::isfinite(sigma_sq_)) throw PreconditionError("sigma^2 must be positive and finite");
  const double lmin = lam_.lam.min();
  if (!(lmin > 0.0))
    throw NotPositiveDefinite("I - C(theta) is not positive definite (smallest eigenvalue " + std::to_string(lmin) +
                              ")");
}

CovSpectrum cov_spectrum(const GmrfParams& params) {
  Grid d = params.precision_spectrum().lam;
  for (double& v : d.values()) v = params.sigma_sq() / v;
  return {SpectrumGrid{std::move(d)}};
}

Grid covariance_grid(const GmrfParams& params) {
  // cov(k, l) = (1/p^2) sum_{i,j} cos(2 pi (ik + jl) / p) D[i, j]
  return inverse_cosine_transform(cov_spectrum(params).dsig.lam);
}

double covariance_lag(const GmrfParams& params, int k, int l) {
  const int p = params.side();
  const Grid& d = cov_spectrum(params).dsig.lam;
  double s = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const long long phase = (static_cast<long long>(i) * k + static_cast<long long>(j) * l) % p;
      s += std::cos(2.0 * std::numbers::pi * static_cast<double>(phase) / p) * d(i, j);
    }
  return s / (static_cast<double>(p) * p);
}

double variance_origin(const GmrfParams& params) { return cov_spectrum(params).dsig.lam.mean(); }

namespace {

SpectrumGrid checked_precision(const ThetaField& theta) {
  SpectrumGrid lam = precision_spectrum(theta);
  if (!(lam.lam.min() > 0.0)) throw NotPositiveDefinite("I - C(theta) is not positive definite");
  return lam;
}

}  // namespace

double kl_divergence(const ThetaField& theta1, const ThetaField& theta2, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw PreconditionError("sigma^2 must be positive");
  if (theta1.side() != theta2.side()) throw PreconditionError("theta sides differ");
  const SpectrumGrid l1 = checked_precision(theta1);
  const SpectrumGrid l2 = checked_precision(theta2);
  double s = 0.0;
  for (std::size_t k = 0; k < l1.lam.size(); ++k) {
    const double r = l2.lam.values()[k] / l1.lam.values()[k];
    // r - 1 - log r, accurate near r = 1
    s += (r - 1.0) - std::log1p(r - 1.0);
  }
  return 0.5 * s;
}

double kl_upper_bound(const ThetaField& theta1, const ThetaField& theta2) {
  if (theta1.side() != theta2.side()) throw PreconditionError("theta sides differ");
  const SpectrumGrid l1 = checked_precision(theta1);
  const SpectrumGrid l2 = checked_precision(theta2);
  double s = 0.0;
  for (std::size_t k = 0; k < l1.lam.size(); ++k) {
    const double a = l1.lam.values()[k], b = l2.lam.values()[k];
    const double f = (1.0 / a + 1.0 / b) * (a - b);
    s += f * f;
  }
  return 0.5 * (9.0 / 64.0) * s;
}

namespace {

void check_moran_alpha(double alpha) {
  if (!(alpha >= 0.0) || !(alpha < 0.25)) throw PreconditionError("Moran limit requires 0 <= alpha < 1/4");
}

}  // namespace

// The y-integral is done in closed form, (1/2pi) \int dy / (a - b cos y) = 1 / sqrt(a^2 - b^2),
// leaving a one-dimensional integral over x in [0, pi].
double moran_green_integral(double alpha) {
  check_moran_alpha(alpha);
  auto f = [alpha](double x) {
    const double a = 1.0 - 2.0 * alpha * std::cos(x);
    return 1.0 / std::sqrt((a - 2.0 * alpha) * (a + 2.0 * alpha));
  };
  return detail::adaptive_gauss_legendre(f, 0.0, std::numbers::pi, 1e-14) / std::numbers::pi;
}

double moran_covariance_limit(double alpha) {
  check_moran_alpha(alpha);
  // (I - 1) / (4 alpha) with the cancellation removed:
  // 1/sqrt(D) - 1 = (1 - D) / (sqrt(D)(1 + sqrt(D))), 1 - D = 4 alpha (c - alpha c^2 + alpha).
  auto f = [alpha](double x) {
    const double c = std::cos(x);
    const double a = 1.0 - 2.0 * alpha * c;
    const double root = std::sqrt((a - 2.0 * alpha) * (a + 2.0 * alpha));
    return (c - alpha * c * c + alpha) / (root * (1.0 + root));
  };
  return detail::adaptive_gauss_legendre(f, 0.0, std::numbers::pi, 1e-14) / std::numbers::pi;
}

namespace {

// Spectrum of H = C(Psi^iso_{1,0}): 2 (cos(2 pi i / p) + cos(2 pi j / p)).
Grid h_spectrum(int p) {
  Grid h(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      h(i, j) = 2.0 * (std::cos(2.0 * std::numbers::pi * i / p) + std::cos(2.0 * std::numbers::pi * j / p));
  return h;
}

}  // namespace

M1IsoVariance asymptotic_variance_m1_iso(const GmrfParams& params, std::optional<double> projection_coeff) {
  const int p = params.side();
  if (p < 3) throw PreconditionError("m1 isotropic variance needs p >= 3");
  const Grid h = h_spectrum(p);
  const Grid& d = cov_spectrum(params).dsig.lam;
  double tr_h2 = 0.0, tr_h2s = 0.0, tr_hs = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hv = h.values()[k], dv = d.values()[k];
    tr_h2 += hv * hv;
    tr_h2s += hv * hv * dv;
    tr_hs += hv * dv;
  }
  M1IsoVariance out;
  out.tr_h2 = tr_h2;
  out.tr_h2_sigma = tr_h2s;
  out.projection_coeff = projection_coeff.value_or(tr_hs / tr_h2s);
  const double s2 = params.sigma_sq();
  out.risk_m1 = 2.0 * s2 * s2 * tr_h2 / tr_h2s;
  double num = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hv = h.values()[k], dv = d.values()[k];
    const double e = (1.0 - out.projection_coeff * hv) * hv * dv;
    num += e * e;
  }
  out.risk_to_projection = 2.0 * num / tr_h2s;
  return out;
}

ThetaField alternating_theta(const TorusGeometry& geom, double alpha) {
  const int p = geom.side();
  if (p % 4 != 0) throw PreconditionError("alternating field needs p divisible by 4");
  BasisElement psi = make_basis_element(geom, {p / 4, p / 4}, BasisKind::isotropic);
  return psi.field * alpha;
}

AlternatingReport alternating_field_check(double alpha, int p, double sigma_sq) {
  if (p % 4 != 0 || p < 4) throw PreconditionError("alternating field needs p divisible by 4");
  if (!(std::abs(alpha) < 0.25)) throw PreconditionError("alternating field needs |alpha| < 1/4");
  const TorusGeometry geom(p);
  const GmrfParams params(alternating_theta(geom, alpha), sigma_sq);
  const Grid h = h_spectrum(p);
  const Grid& d = cov_spectrum(params).dsig.lam;
  double tr_hs = 0.0, tr_h2s = 0.0, tr_h4s2 = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double hv = h.values()[k], dv = d.values()[k];
    tr_hs += hv * dv;
    tr_h2s += hv * hv * dv;
    tr_h4s2 += hv * hv * hv * hv * dv * dv;
  }
  AlternatingReport r;
  r.p = p;
  r.alpha = alpha;
  r.tr_h_sigma = tr_hs;
  r.projection_coeff = tr_hs / tr_h2s;
  const double p2 = static_cast<double>(p) * p;
  r.tr_h4_sigma2_per_p2 = tr_h4s2 / p2;
  r.tr_h2_sigma_per_p2 = tr_h2s / p2;
  r.ratio = tr_h4s2 / tr_h2s;
  r.ratio_times_gap = r.ratio * (1.0 - 4.0 * alpha);
  return r;
}

Eigen::MatrixXd symmetrized_covariance(const GmrfParams& params, const NeighborhoodModel& m, bool isotropic) {
  const auto& orbits = m.orbits(isotropic);
  const Grid cov = covariance_grid(params);
  const auto d = static_cast<Eigen::Index>(orbits.size());
  Eigen::MatrixXd V(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = a; b < d; ++b) {
      double s = 0.0;
      for (const auto& x : orbits[static_cast<std::size_t>(a)].members)
        for (const auto& y : orbits[static_cast<std::size_t>(b)].members) s += cov(x.i - y.i, x.j - y.j);
      V(a, b) = V(b, a) = s;
    }
  return V;
}

RiskLowerBounds risk_lower_bounds(const GmrfParams& params, const NeighborhoodModel& m,
                                  std::optional<double> projection_l1, bool want_h2, bool isotropic) {
  const double d = m.dim(isotropic);
  const double s2 = params.sigma_sq();
  const double phi_max = cov_spectrum(params).dsig.lam.max();
  RiskLowerBounds out;
  out.bound_h1 = 2.0 * s2 * s2 * d / phi_max;
  if (want_h2) {
    const double l1 = params.theta().l1_norm();
    if (!(l1 < 1.0)) throw PreconditionError("second lower bound needs |theta|_1 < 1");
    const double proj = projection_l1.value_or(l1);
    out.h2_used_fallback = !projection_l1.has_value();
    out.bound_h2 = d / (2.0 * s2) * (1.0 - l1) * (1.0 - proj) * (1.0 - proj);
  }
  return out;
}

}  // namespace gmrf
