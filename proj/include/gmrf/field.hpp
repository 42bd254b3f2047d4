#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmrf/circulant.hpp"

namespace gmrf {

/// Stationary GMRF on the torus with precision (I - C(theta)) / sigma^2.
class GmrfParams {
 public:
  /// Throws NotPositiveDefinite unless every eigenvalue of I - C(theta) is positive.
  GmrfParams(ThetaField theta, double sigma_sq);

  const ThetaField& theta() const { return theta_; }
  double sigma_sq() const { return sigma_sq_; }
  const TorusGeometry& geometry() const { return theta_.geometry(); }
  int side() const { return theta_.side(); }
  /// Spectrum of I - C(theta).
  const SpectrumGrid& precision_spectrum() const { return lam_; }

 private:
  ThetaField theta_;
  double sigma_sq_;
  SpectrumGrid lam_;
};

/// Eigenvalues of Sigma: sigma^2 / (1 - mu).
struct CovSpectrum {
  SpectrumGrid dsig;
};

CovSpectrum cov_spectrum(const GmrfParams& params);

/// cov(X[0,0], X[k,l]) for every lag, via one inverse transform of D_Sigma.
Grid covariance_grid(const GmrfParams& params);
double covariance_lag(const GmrfParams& params, int k, int l);
double variance_origin(const GmrfParams& params);

/// KL(P_theta1 || P_theta2) = 1/2 sum (l2/l1 - log(l2/l1) - 1) with l the
/// spectra of I - C. Independent of sigma^2, which only has to be shared.
double kl_divergence(const ThetaField& theta1, const ThetaField& theta2, double sigma_sq = 1.0);

/// 1/2 (9/64) sum (1/l1 + 1/l2)^2 (l1 - l2)^2.
double kl_upper_bound(const ThetaField& theta1, const ThetaField& theta2);

/// Infinite-lattice lag-(1,0) covariance of the four-nearest-neighbour field
/// with coefficient alpha, for sigma^2 = 1:
///   (1/2)(1/4 pi^2) \int\int (cos x + cos y) / (1 - 2 alpha (cos x + cos y)) dx dy.
/// Requires 0 <= alpha < 1/4.
double moran_covariance_limit(double alpha);

/// (1/4 pi^2) \int\int dx dy / (1 - 2 alpha (cos x + cos y)), which equals
/// 4 alpha cov / sigma^2 + 1 for the same field.
double moran_green_integral(double alpha);

struct M1IsoVariance {
  double risk_m1 = 0.0;             // 2 sigma^4 tr(H^2) / tr(H^2 Sigma)
  double risk_to_projection = 0.0;  // 2 tr{[(I - c H) H Sigma]^2} / tr(H^2 Sigma)
  double projection_coeff = 0.0;    // c
  double tr_h2 = 0.0;
  double tr_h2_sigma = 0.0;
};

/// H = C(Psi^iso_{1,0}). Without `projection_coeff` the minimiser
/// tr(H Sigma) / tr(H^2 Sigma) is used.
M1IsoVariance asymptotic_variance_m1_iso(const GmrfParams& params,
                                         std::optional<double> projection_coeff = std::nullopt);

struct AlternatingReport {
  int p = 0;
  double alpha = 0.0;
  double tr_h_sigma = 0.0;
  double projection_coeff = 0.0;
  double tr_h4_sigma2_per_p2 = 0.0;
  double tr_h2_sigma_per_p2 = 0.0;
  double ratio = 0.0;               // tr(H^4 Sigma^2) / tr(H^2 Sigma)
  double ratio_times_gap = 0.0;     // ratio * (1 - 4 alpha)
};

/// Field alpha * Psi^iso_{p/4,p/4}; p must be a multiple of 4 and |alpha| < 1/4.
ThetaField alternating_theta(const TorusGeometry& geom, double alpha);
AlternatingReport alternating_field_check(double alpha, int p, double sigma_sq = 1.0);

/// Covariance of the orbit sums (sum_{x in O_k} X[x])_k over the orbits of m.
/// A self-symmetric s-orbit contributes its single site.
Eigen::MatrixXd symmetrized_covariance(const GmrfParams& params, const NeighborhoodModel& m,
                                       bool isotropic = false);

struct RiskLowerBounds {
  double bound_h1 = 0.0;
  std::optional<double> bound_h2;
  bool h2_used_fallback = false;
};

/// bound_h1 = 2 sigma^4 d / phi_max(Sigma).
/// bound_h2 = (d / (2 sigma^2)) (1 - |theta|_1)(1 - |theta_m|_1)^2, computed only
/// when `want_h2`; without `projection_l1` the factor (1 - |theta|_1)^2 stands in.
RiskLowerBounds risk_lower_bounds(const GmrfParams& params, const NeighborhoodModel& m,
                                  std::optional<double> projection_l1 = std::nullopt, bool want_h2 = true,
                                  bool isotropic = false);

/// n independent realisations of a GMRF.
struct SampleBatch {
  int p = 0;
  int n = 0;
  std::vector<Grid> fields;
  std::uint64_t seed = 0;
  std::string params_digest;
};

/// Exact sampling: X = Sigma^{1/2} W with W white noise, applied in the Fourier
/// basis. Replicate k uses its own random stream, so the output does not depend
/// on the thread count.
SampleBatch sample(const GmrfParams& params, int n, std::uint64_t seed, int threads = 0);

/// Digest of (p, sigma^2, theta) used to tag batches.
std::string params_digest(const GmrfParams& params);

std::vector<std::uint8_t> encode_batch(const SampleBatch& batch);
SampleBatch decode_batch(std::span<const std::uint8_t> bytes);
void write_batch(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_batch(const std::filesystem::path& path);

}  // namespace gmrf
