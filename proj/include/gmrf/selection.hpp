#pragma once

#include <optional>
#include <vector>

#include "gmrf/contrast.hpp"

namespace gmrf {

/// pen(m) = K sigma^2 rho1^2 rho2 d_m / (n p^2).
///
/// rho2 caps the covariance spectrum, phi_max(Sigma) <= rho1^2 rho2 sigma^2, so
/// that pen(m) dominates K d_m phi_max(Sigma) / (n p^2).
struct PenaltySpec {
  double K = 3.0;
  double rho1 = 2.0;
  double rho2 = 1.0;
  double sigma_sq = 1.0;
  int n = 1;
  int p = 2;

  double penalty(int dim) const;
};

/// rho2 for which phi_max(Sigma) = rho1^2 rho2 sigma^2 holds with equality.
double rho2_for(const GmrfParams& params, double rho1);

struct SelectionRow {
  int index = 0;
  int dim = 0;
  double contrast = 0.0;
  double penalty = 0.0;
  double criterion = 0.0;
  bool converged = true;
};

struct SelectionResult {
  std::vector<SelectionRow> rows;
  std::vector<FitResult> fits;
  int chosen = 0;  // model index (1-based)
  PenaltySpec spec;
  bool isotropic = false;

  const FitResult& chosen_fit() const;
};

/// argmin over the collection of contrast(fit) + pen; ties go to the smaller dimension.
/// `max_models` restricts the scan to the first models of the collection.
SelectionResult select_model(const Periodogram& pgram, const ModelCollection& coll, const PenaltySpec& spec,
                             bool isotropic = false, int threads = 0,
                             std::optional<int> max_models = std::nullopt);

/// Bias l(theta_{m_i}, theta) = expected_contrast(theta_{m_i}) - sigma^2 along the collection.
std::vector<double> bias_sequence(const GmrfParams& params, const ModelCollection& coll, bool isotropic = false,
                                  std::optional<int> max_models = std::nullopt);

struct AdaptiveRate {
  int i_star = 0;  // 0 when no index satisfies the condition
  double lower = 0.0;
  double upper = 0.0;
};

/// i* = sup{ i : a_i^2 >= sigma^2 d_{m_i} / (n p^2) } (sup of the empty set is 0),
/// lower = max(a_{i*+1}^2, sigma^2 d_{m_i*} / (n p^2)), upper = their sum.
/// Beyond the last model a_{i*+1} is taken as 0; d_{m_0} = 0.
AdaptiveRate adaptive_rate_table(const std::vector<double>& a_seq, const ModelCollection& coll, int n,
                                 double sigma_sq, bool isotropic = false);

}  // namespace gmrf
