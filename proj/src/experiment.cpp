#include "gmrf/experiment.hpp"

#include <cmath>

#include "gmrf/error.hpp"
#include "gmrf/parallel.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

double RiskTable::frequency_at_least(int index) const {
  double s = 0.0;
  for (const auto& r : rows)
    if (r.index >= index) s += r.frequency;
  return s;
}

namespace {

struct Replicate {
  std::vector<double> losses;
  double selected_loss = 0.0;
  int chosen = 0;
  int nonconverged = 0;
};

std::pair<double, double> mean_se(const std::vector<double>& v) {
  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  const double n = static_cast<double>(v.size());
  const double m = s / n;
  const double var = n > 1 ? std::max(s2 / n - m * m, 0.0) * n / (n - 1) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace

RiskTable run_risk_experiment(const GmrfParams& params, const ModelCollection& coll, const PenaltySpec& spec,
                              int replicates, std::uint64_t seed, bool isotropic, std::optional<int> max_models,
                              int threads) {
  if (replicates < 1) throw PreconditionError("need at least one replicate");
  if (spec.p != params.side()) throw PreconditionError("penalty spec p does not match the field");
  const std::size_t count =
      max_models ? std::min<std::size_t>(coll.size(), static_cast<std::size_t>(std::max(*max_models, 1))) : coll.size();

  std::vector<Replicate> reps(static_cast<std::size_t>(replicates));
  parallel_for(reps.size(), threads, [&](std::size_t r) {
    const SampleBatch batch = sample(params, spec.n, derive_seed(seed, "risk", r), 1);
    const Periodogram pg = periodogram(batch, 1);
    const SelectionResult sel = select_model(pg, coll, spec, isotropic, 1, static_cast<int>(count));
    Replicate& out = reps[r];
    for (const auto& f : sel.fits) {
      out.losses.push_back(loss(f.theta, params));
      if (!f.converged) ++out.nonconverged;
    }
    out.chosen = sel.chosen;
    out.selected_loss = loss(sel.chosen_fit().theta, params);
  });

  RiskTable t;
  t.replicates = replicates;
  t.n = spec.n;
  t.p = params.side();
  t.seed = seed;
  const std::vector<double> bias = bias_sequence(params, coll, isotropic, static_cast<int>(count));
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> lk;
    int chosen = 0;
    for (const auto& rep : reps) {
      lk.push_back(rep.losses[k]);
      if (rep.chosen == coll.models[k].index) ++chosen;
    }
    RiskRow row;
    row.index = coll.models[k].index;
    row.dim = coll.models[k].dim(isotropic);
    std::tie(row.risk, row.risk_se) = mean_se(lk);
    row.bias = bias[k];
    row.penalty = spec.penalty(row.dim);
    row.frequency = static_cast<double>(chosen) / replicates;
    t.rows.push_back(row);
    if (k == 0 || row.risk < t.best_fixed_risk) {
      t.best_fixed_risk = row.risk;
      t.best_fixed_index = row.index;
    }
  }
  std::vector<double> sel;
  for (const auto& rep : reps) {
    sel.push_back(rep.selected_loss);
    t.nonconverged_fits += rep.nonconverged;
  }
  std::tie(t.selected_risk, t.selected_risk_se) = mean_se(sel);
  t.oracle_ratio = t.selected_risk / t.best_fixed_risk;
  return t;
}

}  // namespace gmrf
