#include "gmrf/selection.hpp"

#include <algorithm>
#include <cmath>

#include "gmrf/error.hpp"
#include "gmrf/parallel.hpp"

namespace gmrf {

double PenaltySpec::penalty(int dim) const {
  return K * sigma_sq * rho1 * rho1 * rho2 * dim / (static_cast<double>(n) * p * p);
}

double rho2_for(const GmrfParams& params, double rho1) {
  return cov_spectrum(params).dsig.lam.max() / (rho1 * rho1 * params.sigma_sq());
}

const FitResult& SelectionResult::chosen_fit() const {
  for (const auto& f : fits)
    if (f.model_index == chosen) return f;
  throw PreconditionError("selection has no fit for the chosen model");
}

namespace {

std::size_t model_count(const ModelCollection& coll, std::optional<int> max_models) {
  if (!max_models) return coll.size();
  return std::min<std::size_t>(coll.size(), static_cast<std::size_t>(std::max(*max_models, 0)));
}

}  // namespace

SelectionResult select_model(const Periodogram& pgram, const ModelCollection& coll, const PenaltySpec& spec,
                             bool isotropic, int threads, std::optional<int> max_models) {
  if (spec.p != pgram.p) throw PreconditionError("penalty spec p does not match the periodogram");
  if (pgram.n > 0 && spec.n != pgram.n) throw PreconditionError("penalty spec n does not match the periodogram");
  if (!(spec.K >= 0.0) || !(spec.rho1 > 0.0) || !(spec.rho2 >= 0.0) || !(spec.sigma_sq > 0.0))
    throw PreconditionError("penalty spec needs K >= 0, rho1 > 0, rho2 >= 0, sigma^2 > 0");
  const std::size_t count = model_count(coll, max_models);
  if (count == 0) throw PreconditionError("empty model collection");

  std::vector<std::optional<FitResult>> fits(count);
  parallel_for(count, threads, [&](std::size_t k) {
    fits[k] = fit_model(pgram, coll.models[k], spec.rho1, isotropic);
  });

  SelectionResult out;
  out.spec = spec;
  out.isotropic = isotropic;
  std::size_t best = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto& m = coll.models[k];
    SelectionRow row;
    row.index = m.index;
    row.dim = m.dim(isotropic);
    row.contrast = fits[k]->contrast_value;
    row.penalty = spec.penalty(row.dim);
    row.criterion = row.contrast + row.penalty;
    row.converged = fits[k]->converged;
    out.rows.push_back(row);
    const auto& b = out.rows[best];
    if (row.criterion < b.criterion || (row.criterion == b.criterion && row.dim < b.dim)) best = k;
    out.fits.push_back(std::move(*fits[k]));
  }
  out.chosen = out.rows[best].index;
  return out;
}

std::vector<double> bias_sequence(const GmrfParams& params, const ModelCollection& coll, bool isotropic,
                                  std::optional<int> max_models) {
  const std::size_t count = model_count(coll, max_models);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const ThetaField tm = conditional_coefficients(params, coll.models[k], isotropic);
    out.push_back(std::max(expected_contrast(tm, params) - params.sigma_sq(), 0.0));
  }
  return out;
}

AdaptiveRate adaptive_rate_table(const std::vector<double>& a_seq, const ModelCollection& coll, int n,
                                 double sigma_sq, bool isotropic) {
  if (a_seq.empty()) throw PreconditionError("empty a sequence");
  if (a_seq.size() > coll.size()) throw PreconditionError("a sequence longer than the model collection");
  if (n < 1 || !(sigma_sq > 0.0)) throw PreconditionError("need n >= 1 and sigma^2 > 0");
  for (std::size_t k = 1; k < a_seq.size(); ++k)
    if (std::abs(a_seq[k]) > std::abs(a_seq[k - 1])) throw PreconditionError("a sequence must be nonincreasing");
  const double np2 = static_cast<double>(n) * coll.geometry.side() * coll.geometry.side();
  if (a_seq[0] * a_seq[0] < sigma_sq / np2) throw PreconditionError("a_1^2 must be at least sigma^2 / (n p^2)");

  AdaptiveRate r;
  for (std::size_t k = 0; k < a_seq.size(); ++k) {
    const double var = sigma_sq * coll.models[k].dim(isotropic) / np2;
    if (a_seq[k] * a_seq[k] >= var) r.i_star = static_cast<int>(k) + 1;
  }
  const double a_next = static_cast<std::size_t>(r.i_star) < a_seq.size() ? a_seq[static_cast<std::size_t>(r.i_star)] : 0.0;
  const double var_star =
      r.i_star == 0 ? 0.0 : sigma_sq * coll.models[static_cast<std::size_t>(r.i_star - 1)].dim(isotropic) / np2;
  r.lower = std::max(a_next * a_next, var_star);
  r.upper = a_next * a_next + var_star;
  return r;
}

}  // namespace gmrf
