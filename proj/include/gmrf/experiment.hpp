#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmrf/selection.hpp"

namespace gmrf {

struct RiskRow {
  int index = 0;
  int dim = 0;
  double risk = 0.0;       // Monte Carlo mean loss of the fixed-model estimator
  double risk_se = 0.0;
  double bias = 0.0;       // l(theta_m, theta)
  double penalty = 0.0;
  double frequency = 0.0;  // share of replicates selecting this model
};

struct RiskTable {
  std::vector<RiskRow> rows;
  double selected_risk = 0.0;
  double selected_risk_se = 0.0;
  double best_fixed_risk = 0.0;
  int best_fixed_index = 0;
  double oracle_ratio = 0.0;  // selected_risk / best_fixed_risk
  int replicates = 0;
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  int nonconverged_fits = 0;

  /// Share of replicates whose selected model index is at least `index`.
  double frequency_at_least(int index) const;
};

/// Replicate r draws a batch with seed derive_seed(seed, "risk", r), fits every
/// model of the collection and runs the penalized selection. The per-model
/// fixed estimator risk and the selected-model risk are averaged in replicate order.
RiskTable run_risk_experiment(const GmrfParams& params, const ModelCollection& coll, const PenaltySpec& spec,
                              int replicates, std::uint64_t seed, bool isotropic = false,
                              std::optional<int> max_models = std::nullopt, int threads = 0);

}  // namespace gmrf
