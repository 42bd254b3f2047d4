#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gmrf/field.hpp"

namespace gmrf {

/// One coefficient vector t of an order-2 chaos in N variables.
///
/// coeffs is symmetric: coeffs(i, j) = t_{i,j} for i != j and coeffs(i, i) = t_i.
/// The chaos value is sum_{i<j} t_{i,j} y_i y_j + sum_i t_i y_i^2 + t_0
/// = (1/2) y' M y + t_0 with M = (1 + delta_ij) t_ij.
struct ChaosElement {
  Eigen::MatrixXd coeffs;
  double constant = 0.0;

  int dim() const { return static_cast<int>(coeffs.rows()); }
  Eigen::MatrixXd doubled() const;  // M
};

struct ChaosFamily {
  int N = 0;
  std::vector<ChaosElement> elements;
};

/// Throws PreconditionError on size mismatch or asymmetric coefficients.
void validate_family(const ChaosFamily& family);

double chaos_value(const ChaosElement& t, const Eigen::VectorXd& y);
/// T(y) = max over elements of |value|.
double chaos_supremum(const ChaosFamily& family, const Eigen::VectorXd& y);

/// E = max over elements of the spectral norm of M.
double operator_E(const ChaosFamily& family);
/// D(y) = max over elements of |M y|.
double functional_D(const ChaosFamily& family, const Eigen::VectorXd& y);

/// Element t^R for the n-fold block embedding of an r x r symmetric R:
/// M = (2/n) blockdiag(R, ..., R), t_0 = -tr R, so the value is
/// (1/n) sum_k Y_k' R Y_k - tr R with Y_k the k-th block of length r.
ChaosElement matrix_family_element(const Eigen::MatrixXd& R, int n);

enum class ChaosMode { gaussian, rademacher };

struct TailPoint {
  double x = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  bool censored = false;  // fewer than 50 exceedances
  double bound = 0.0;     // at the fitted constants
};

struct TailReport {
  ChaosMode mode = ChaosMode::gaussian;
  int block = 1;           // Rademacher sums per coordinate (CLT embedding)
  double e_T = 0.0;
  double e_T_se = 0.0;
  double e_D = 0.0;
  double E_const = 0.0;
  std::vector<TailPoint> points;
  bool fitted = false;
  double L1 = 0.0;
  double L2 = 0.0;
  int n_mc = 0;
  std::uint64_t seed = 0;
};

/// exp(-(x^2 / (e_D^2 L1) min x / (E L2))).
double chaos_tail_bound(double x, double e_D, double E, double L1, double L2);

/// Monte Carlo survival P{T >= E[T] + x} on the grid and the smallest (L1, L2)
/// on the log2 grid [2^-4, 2^10]^2 (ordered by L1 L2, then L1) for which the
/// bound dominates empirical + 2 standard errors at every x.
TailReport tail_experiment(const ChaosFamily& family, int n_mc, const std::vector<double>& x_grid,
                           std::uint64_t seed, ChaosMode mode = ChaosMode::gaussian, int block = 1,
                           int threads = 0);

std::vector<double> fit_grid_constants();

ChaosFamily chaos_family_from_json(std::string_view text);
std::string chaos_family_to_json(const ChaosFamily& family);

struct ModelPairStats {
  int rank = 0;  // d_{m^2, m'^2}
  double phi_max = 0.0;
  int n = 0;
  int n_mc = 0;

  double ez = 0.0;
  double ez2 = 0.0;
  double ez2_se = 0.0;
  double ez2_exact = 0.0;   // (2/(n p^2)) sum_i tr(F_i D F_i)
  double ez2_bound = 0.0;   // 2 d phi_max / (n p^2)
  double b_exact = 0.0;     // (2/n) sup phi_max(R sqrt(D) / p)
  double b_bound = 0.0;     // 2 sqrt(phi_max) / (n p)
  double ew = 0.0;
  double ew_se = 0.0;
  double ew_bound = 0.0;    // 4 phi_max / (n p^2) (1 + sqrt(2 d / n))
  double sum_ff = 0.0;      // sum_{i,j} |F_i F_j|^2, at most d
  double z2_identity_gap = 0.0;  // max relative gap between the two Z^2 evaluations

  bool ez2_ok = false;
  bool b_ok = false;
  bool ew_ok = false;
  bool jensen_ok = false;
  bool exact_ok = false;    // MC E[Z^2] within 2 SE of the exact value
};

/// Statistics of Z, B and W for the pair (m, m'). U is spanned by the spectra of
/// C(Psi_k) and C(Psi_k) C(Psi_l) over the s-orbits of m u m'; U' = U sqrt(D)/p.
/// Ybar[j, j] is drawn as chi^2_n / n.
ModelPairStats model_pair_stats(const GmrfParams& params, const NeighborhoodModel& m,
                                const NeighborhoodModel& m_prime, int n, int n_mc, std::uint64_t seed,
                                int threads = 0);

}  // namespace gmrf
