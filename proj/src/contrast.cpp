#include "gmrf/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "gmrf/error.hpp"
#include "gmrf/fft.hpp"
#include "gmrf/parallel.hpp"

namespace gmrf {

Periodogram periodogram(const SampleBatch& batch, int threads) {
  if (batch.n < 1 || batch.fields.empty()) throw PreconditionError("periodogram of an empty batch");
  const int p = batch.p;
  const std::size_t np2 = static_cast<std::size_t>(p) * p;
  std::vector<Grid> parts(batch.fields.size(), Grid(p));
  parallel_for(batch.fields.size(), threads, [&](std::size_t k) {
    std::vector<std::complex<double>> spec(np2);
    thread_fft(p).forward(batch.fields[k], spec);
    for (std::size_t q = 0; q < np2; ++q) parts[k].values()[q] = std::norm(spec[q]);
  });
  Grid total(p);
  for (const auto& g : parts) total += g;  // fixed order
  total *= 1.0 / (static_cast<double>(batch.fields.size()) * static_cast<double>(np2));
  return {p, batch.n, std::move(total)};
}

Periodogram population_periodogram(const GmrfParams& params) {
  return {params.side(), 0, cov_spectrum(params).dsig.lam};
}

double contrast(const ThetaField& theta_prime, const Periodogram& pgram) {
  if (theta_prime.side() != pgram.p) throw PreconditionError("theta and periodogram sides differ");
  const SpectrumGrid mu = spectrum_of_C(theta_prime);
  double s = 0.0;
  for (std::size_t k = 0; k < mu.lam.size(); ++k) {
    const double r = 1.0 - mu.lam.values()[k];
    s += r * r * pgram.grid.values()[k];
  }
  return s / static_cast<double>(mu.lam.size());
}

double expected_contrast(const ThetaField& theta_prime, const GmrfParams& params) {
  return contrast(theta_prime, population_periodogram(params));
}

Grid contrast_gradient(const ThetaField& theta_prime, const Periodogram& pgram) {
  const SpectrumGrid mu = spectrum_of_C(theta_prime);
  Grid w(pgram.p);
  for (std::size_t k = 0; k < w.size(); ++k) w.values()[k] = (1.0 - mu.lam.values()[k]) * pgram.grid.values()[k];
  Grid g = cosine_transform(w);
  g *= -2.0 / static_cast<double>(w.size());
  return g;
}

double loss(const ThetaField& theta_hat, const GmrfParams& params) {
  if (theta_hat.side() != params.side()) throw PreconditionError("theta sides differ");
  const SpectrumGrid mu_hat = spectrum_of_C(theta_hat);
  const SpectrumGrid& lam = params.precision_spectrum();
  double s = 0.0;
  for (std::size_t k = 0; k < lam.lam.size(); ++k) {
    // mu_hat - mu = lam - (1 - mu_hat)
    const double diff = mu_hat.lam.values()[k] - (1.0 - lam.lam.values()[k]);
    s += diff * diff / lam.lam.values()[k];
  }
  return params.sigma_sq() * s / static_cast<double>(lam.lam.size());
}

ModelCoordinates model_coordinates(const TorusGeometry& geom, const NeighborhoodModel& m, bool isotropic) {
  ModelCoordinates mc{geom, m.index, isotropic, m.orbits(isotropic), {}, {}};
  for (const auto& o : mc.orbits) {
    mc.weights.push_back(static_cast<double>(o.size()));
    mc.spectra.push_back(spectrum_of_grid(orbit_indicator(geom, o)).lam);
  }
  return mc;
}

ThetaField theta_from_coeffs(const ModelCoordinates& mc, const Eigen::VectorXd& c) {
  if (c.size() != mc.dim()) throw PreconditionError("coefficient vector does not match model dimension");
  Grid g(mc.geometry.side());
  for (int k = 0; k < mc.dim(); ++k)
    for (const auto& x : mc.orbits[static_cast<std::size_t>(k)].members) g(x.i, x.j) = c[k];
  return ThetaField(mc.geometry, std::move(g));
}

double weighted_l1(const ModelCoordinates& mc, const Eigen::VectorXd& c) {
  double s = 0.0;
  for (int k = 0; k < mc.dim(); ++k) s += mc.weights[static_cast<std::size_t>(k)] * std::abs(c[k]);
  return s;
}

QuadraticContrast quadratic_contrast(const ModelCoordinates& mc, const Grid& grid) {
  const int d = mc.dim();
  const double inv = 1.0 / static_cast<double>(grid.size());
  QuadraticContrast qc;
  qc.Q.resize(d, d);
  qc.q.resize(d);
  qc.a0 = grid.sum() * inv;
  const auto g = grid.values();
  for (int k = 0; k < d; ++k) {
    const auto bk = mc.spectra[static_cast<std::size_t>(k)].values();
    double s = 0.0;
    for (std::size_t t = 0; t < g.size(); ++t) s += bk[t] * g[t];
    qc.q[k] = s * inv;
    for (int l = k; l < d; ++l) {
      const auto bl = mc.spectra[static_cast<std::size_t>(l)].values();
      double z = 0.0;
      for (std::size_t t = 0; t < g.size(); ++t) z += bk[t] * bl[t] * g[t];
      qc.Q(k, l) = qc.Q(l, k) = z * inv;
    }
  }
  return qc;
}

Eigen::VectorXd project_weighted_l1(const Eigen::VectorXd& v, const std::vector<double>& w, double rho) {
  const auto d = v.size();
  if (static_cast<std::size_t>(d) != w.size()) throw PreconditionError("weight vector size mismatch");
  if (rho < 0.0) throw PreconditionError("l1 radius must be nonnegative");
  double norm = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) norm += w[static_cast<std::size_t>(k)] * std::abs(v[k]);
  if (norm <= rho) return v;
  if (rho == 0.0) return Eigen::VectorXd::Zero(d);

  // x_k = sign(v_k) max(|v_k| - tau w_k, 0); tau solves sum w_k max(|v_k| - tau w_k, 0) = rho.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  auto ratio = [&](Eigen::Index k) { return std::abs(v[k]) / w[static_cast<std::size_t>(k)]; };
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return ratio(a) > ratio(b); });
  double sum_wv = 0.0, sum_w2 = 0.0, tau = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Eigen::Index k = order[r];
    const double wk = w[static_cast<std::size_t>(k)];
    sum_wv += wk * std::abs(v[k]);
    sum_w2 += wk * wk;
    const double t = (sum_wv - rho) / sum_w2;
    const double next = r + 1 < order.size() ? ratio(order[r + 1]) : 0.0;
    if (t >= next) {
      tau = t;
      break;
    }
  }
  Eigen::VectorXd x(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double mag = std::max(std::abs(v[k]) - tau * w[static_cast<std::size_t>(k)], 0.0);
    x[k] = v[k] < 0 ? -mag : mag;
  }
  return x;
}

namespace {

FitResult finish(const QuadraticContrast& qc, const ModelCoordinates& mc, Eigen::VectorXd c, int iterations,
                 bool converged, double kkt) {
  FitResult r{mc.model_index, mc.isotropic, c, theta_from_coeffs(mc, c), qc.value(c), iterations, converged,
              weighted_l1(mc, c), kkt};
  return r;
}

}  // namespace

FitResult minimize_on_ball(const QuadraticContrast& qc, const ModelCoordinates& mc, double rho,
                           const SolverOptions& opts) {
  if (!(rho >= 0.0)) throw PreconditionError("l1 radius must be nonnegative");
  const int d = mc.dim();
  if (d == 0) return finish(qc, mc, Eigen::VectorXd(0), 0, true, 0.0);

  Eigen::LLT<Eigen::MatrixXd> llt(qc.Q);
  if (llt.info() == Eigen::Success) {
    Eigen::VectorXd c = llt.solve(qc.q);
    if (c.allFinite() && weighted_l1(mc, c) <= rho) {
      const double kkt = qc.gradient(c).norm();
      return finish(qc, mc, std::move(c), 0, true, kkt);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qc.Q, Eigen::EigenvaluesOnly);
  const double lip = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lip;
  const double scale = std::max(1.0, 2.0 * qc.q.norm());

  Eigen::VectorXd c = Eigen::VectorXd::Zero(d), y = c, prev = c;
  double t = 1.0;
  auto kkt_of = [&](const Eigen::VectorXd& x) {
    return (x - project_weighted_l1(x - step * qc.gradient(x), mc.weights, rho)).norm() * lip;
  };
  for (int it = 1; it <= opts.max_iterations; ++it) {
    prev = c;
    c = project_weighted_l1(y - step * qc.gradient(y), mc.weights, rho);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    // adaptive restart keeps the iteration monotone
    if ((y - c).dot(c - prev) > 0.0) {
      y = c;
      t = 1.0;
    } else {
      y = c + ((t - 1.0) / t_next) * (c - prev);
      t = t_next;
    }
    if (it % 10 == 0 || it == opts.max_iterations) {
      const double kkt = kkt_of(c);
      if (kkt < opts.kkt_tolerance * scale) return finish(qc, mc, std::move(c), it, true, kkt);
    }
  }
  const double kkt = kkt_of(c);
  return finish(qc, mc, std::move(c), opts.max_iterations, false, kkt);
}

FitResult fit_model(const Periodogram& pgram, const NeighborhoodModel& m, double rho, bool isotropic,
                    const SolverOptions& opts) {
  for (double v : pgram.grid.values())
    if (v < 0.0) throw PreconditionError("periodogram entries must be nonnegative");
  const ModelCoordinates mc = model_coordinates(TorusGeometry(pgram.p), m, isotropic);
  return minimize_on_ball(quadratic_contrast(mc, pgram.grid), mc, rho, opts);
}

FitResult project_population(const GmrfParams& params, const NeighborhoodModel& m, double rho, bool isotropic,
                             const SolverOptions& opts) {
  return fit_model(population_periodogram(params), m, rho, isotropic, opts);
}

ThetaField conditional_coefficients(const GmrfParams& params, const NeighborhoodModel& m, bool isotropic) {
  const auto& orbits = m.orbits(isotropic);
  const Eigen::MatrixXd V = symmetrized_covariance(params, m, isotropic);
  const Grid cov = covariance_grid(params);
  Eigen::VectorXd g(static_cast<Eigen::Index>(orbits.size()));
  for (std::size_t k = 0; k < orbits.size(); ++k) {
    double s = 0.0;
    for (const auto& x : orbits[k].members) s += cov(x.i, x.j);
    g[static_cast<Eigen::Index>(k)] = s;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(V);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("orbit-sum covariance is singular");
  const Eigen::VectorXd c = llt.solve(g);
  const TorusGeometry& geom = params.geometry();
  ModelCoordinates mc{geom, m.index, isotropic, orbits, {}, {}};
  return theta_from_coeffs(mc, c);
}

}  // namespace gmrf
