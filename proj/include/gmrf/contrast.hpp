#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmrf/field.hpp"

namespace gmrf {

/// Per-frequency second moment: grid[i,j] = (1/(n p^2)) sum_k |DFT(X_k)[i,j]|^2.
/// The population version (n = 0) stores D_Sigma, its expectation.
struct Periodogram {
  int p = 0;
  int n = 0;
  Grid grid;
};

Periodogram periodogram(const SampleBatch& batch, int threads = 0);
Periodogram population_periodogram(const GmrfParams& params);

/// gamma(theta') = (1/p^2) sum (1 - mu')^2 grid: the conditional least-squares
/// criterion (1/(n p^2)) sum_k |(I - C(theta')) X_k|^2.
double contrast(const ThetaField& theta_prime, const Periodogram& pgram);
double expected_contrast(const ThetaField& theta_prime, const GmrfParams& params);

/// d gamma / d theta'[k,l] with every entry treated as a free variable.
Grid contrast_gradient(const ThetaField& theta_prime, const Periodogram& pgram);

/// sigma^2 / p^2 sum (mu_hat - mu)^2 / lambda.
double loss(const ThetaField& theta_hat, const GmrfParams& params);

/// Orbit coordinates of Theta_m: theta(c) = sum_k c_k Psi_k.
struct ModelCoordinates {
  TorusGeometry geometry;
  int model_index = 0;
  bool isotropic = false;
  std::vector<OrbitClass> orbits;
  std::vector<double> weights;  // orbit sizes: |theta(c)|_1 = sum_k w_k |c_k|
  std::vector<Grid> spectra;    // spectrum of C(Psi_k)

  int dim() const { return static_cast<int>(orbits.size()); }
};

ModelCoordinates model_coordinates(const TorusGeometry& geom, const NeighborhoodModel& m, bool isotropic);
ThetaField theta_from_coeffs(const ModelCoordinates& mc, const Eigen::VectorXd& c);
double weighted_l1(const ModelCoordinates& mc, const Eigen::VectorXd& c);

/// gamma(theta(c)) = a0 - 2 q'c + c'Qc.
struct QuadraticContrast {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double a0 = 0.0;

  double value(const Eigen::VectorXd& c) const { return a0 - 2.0 * q.dot(c) + c.dot(Q * c); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& c) const { return 2.0 * (Q * c - q); }
};

QuadraticContrast quadratic_contrast(const ModelCoordinates& mc, const Grid& grid);

/// Euclidean projection onto { x : sum_k w_k |x_k| <= rho }, w_k > 0.
Eigen::VectorXd project_weighted_l1(const Eigen::VectorXd& v, const std::vector<double>& w, double rho);

struct SolverOptions {
  int max_iterations = 100000;
  double kkt_tolerance = 1e-8;
};

struct FitResult {
  int model_index = 0;
  bool isotropic = false;
  Eigen::VectorXd coeffs;
  ThetaField theta;
  double contrast_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double active_l1 = 0.0;
  double kkt_residual = 0.0;
};

/// Minimises the quadratic over the weighted l1 ball. The unconstrained
/// minimiser is returned directly when it is feasible; otherwise accelerated
/// projected gradient runs from 0 with step 1/L, L = 2 phi_max(Q).
FitResult minimize_on_ball(const QuadraticContrast& qc, const ModelCoordinates& mc, double rho,
                           const SolverOptions& opts = {});

FitResult fit_model(const Periodogram& pgram, const NeighborhoodModel& m, double rho, bool isotropic,
                    const SolverOptions& opts = {});
FitResult project_population(const GmrfParams& params, const NeighborhoodModel& m, double rho, bool isotropic,
                             const SolverOptions& opts = {});

/// Regression coefficients of X[0,0] on the orbit sums of m: solves V c = g with
/// V the orbit-sum covariance and g_k = sum_{x in O_k} cov(x).
ThetaField conditional_coefficients(const GmrfParams& params, const NeighborhoodModel& m, bool isotropic = false);

}  // namespace gmrf
