#include "gmrf/minimax.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "gmrf/error.hpp"
#include "gmrf/parallel.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

double Hypercube::margin() const {
  const double d = dimension();
  return 1.0 - center.l1_norm() - (isotropic ? 8.0 : 2.0) * radius * d;
}

ThetaField Hypercube::vertex(std::uint64_t phi) const {
  const auto& orbits = model.orbits(isotropic);
  Grid g = center.values();
  for (std::size_t k = 0; k < orbits.size(); ++k)
    if ((phi >> k) & 1U)
      for (const auto& x : orbits[k].members) g(x.i, x.j) += radius;
  return ThetaField(center.geometry(), std::move(g));
}

Hypercube make_hypercube(const NeighborhoodModel& m, const ThetaField& center, double r, bool isotropic) {
  if (!(r >= 0.0)) throw PreconditionError("hypercube radius must be nonnegative");
  if (m.dim(isotropic) > 62) throw PreconditionError("hypercube dimension above 62 is not supported");
  const TorusGeometry& geom = center.geometry();
  const int p = geom.side();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (center(i, j) != 0.0 && !m.contains({i, j}))
        throw PreconditionError("hypercube centre is not supported on the model");
  if (isotropic)
    for (const auto& o : m.orbits_g)
      for (const auto& x : o.members)
        if (center(x.i, x.j) != center(o.representative.i, o.representative.j))
          throw PreconditionError("isotropic hypercube centre is not constant on G-orbits");
  return Hypercube{m, center, r, isotropic};
}

std::size_t vg_target_size(int d) { return static_cast<std::size_t>(std::ceil(std::exp(d / 8.0) - 1e-12)); }

int hamming(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

namespace {

bool far_from_all(const std::vector<std::uint64_t>& words, std::uint64_t w, int min_dist) {
  return std::all_of(words.begin(), words.end(), [&](std::uint64_t v) { return hamming(v, w) >= min_dist; });
}

}  // namespace

VGCode build_vg_code(int d, std::uint64_t seed) {
  if (d < 1 || d > 64) throw PreconditionError("Varshamov-Gilbert code needs 1 <= d <= 64");
  const std::size_t target = std::max<std::size_t>(vg_target_size(d), 2);
  const int min_dist = d / 4 + 1;  // strictly greater than d/4
  const std::uint64_t mask = d == 64 ? ~0ULL : ((1ULL << d) - 1);

  VGCode code{d, {0}};
  RandomStream rng(seed, "vg-code", static_cast<std::uint64_t>(d));
  const double budget = 64.0 * std::exp2(d / 8.0);
  for (double tries = 0; tries < budget && code.words.size() < target; tries += 1.0) {
    const std::uint64_t w = rng.bits() & mask;
    if (far_from_all(code.words, w, min_dist)) code.words.push_back(w);
  }
  if (code.words.size() >= target) return code;

  if (d <= 24) {
    code.words = {0};
    for (std::uint64_t w = 1; w <= mask && code.words.size() < target; ++w)
      if (far_from_all(code.words, w, min_dist)) code.words.push_back(w);
    if (code.words.size() >= target) return code;
  }
  throw PreconditionError("Varshamov-Gilbert construction failed for d=" + std::to_string(d));
}

VGCheck verify_vg_code(const VGCode& code) {
  VGCheck c;
  c.size = code.words.size();
  c.min_distance = std::numeric_limits<int>::max();
  for (std::size_t a = 0; a < code.words.size(); ++a)
    for (std::size_t b = a + 1; b < code.words.size(); ++b)
      c.min_distance = std::min(c.min_distance, hamming(code.words[a], code.words[b]));
  if (c.size < 2) c.min_distance = 0;
  c.distance_ok = c.size >= 2 && 4.0 * c.min_distance > code.d;
  c.size_ok = c.size >= 1 && std::log(static_cast<double>(c.size)) >= code.d / 8.0;
  return c;
}

double kl_bound_hypercube(const Hypercube& cube, int n) {
  const double margin = cube.margin();
  if (!(margin > 0.0)) throw PreconditionError("hypercube margin 1 - |theta'|_1 - c r d must be positive");
  const int p = cube.center.side();
  const double r2p2n = cube.radius * cube.radius * p * p * n;
  if (cube.isotropic) return 9.0 * cube.model.dim() * r2p2n / (2.0 * margin * margin);
  return 9.0 * cube.model.dim() * r2p2n / (8.0 * margin * margin);
}

PairKl exact_max_pair_kl(const Hypercube& cube, int n, std::uint64_t seed, std::size_t sampled_pairs, int threads) {
  const int d = cube.dimension();
  const auto& orbits = cube.model.orbits(cube.isotropic);
  const SpectrumGrid base = precision_spectrum(cube.center);
  std::vector<Grid> dir;
  for (const auto& o : orbits) dir.push_back(spectrum_of_grid(orbit_indicator(cube.center.geometry(), o)).lam);

  auto lambda = [&](std::uint64_t phi) {
    Grid l = base.lam;
    for (int k = 0; k < d; ++k)
      if ((phi >> k) & 1U) l -= dir[static_cast<std::size_t>(k)] * cube.radius;
    if (!(l.min() > 0.0)) throw NotPositiveDefinite("hypercube vertex is not positive definite");
    return l;
  };
  auto kl = [](const Grid& l1, const Grid& l2) {
    double s = 0.0;
    for (std::size_t q = 0; q < l1.size(); ++q) {
      const double r = l2.values()[q] / l1.values()[q];
      s += (r - 1.0) - std::log1p(r - 1.0);
    }
    return 0.5 * s;
  };

  PairKl out;
  if (d <= 10) {
    const std::size_t nv = std::size_t{1} << d;
    std::vector<Grid> lam(nv);
    parallel_for(nv, threads, [&](std::size_t v) { lam[v] = lambda(v); });
    std::vector<PairKl> rows(nv);
    parallel_for(nv, threads, [&](std::size_t a) {
      for (std::size_t b = 0; b < nv; ++b) {
        if (a == b) continue;
        const double v = kl(lam[a], lam[b]);
        if (v > rows[a].max_kl) rows[a] = PairKl{v, a, b, 0, true};
      }
    });
    for (const auto& r : rows)
      if (r.max_kl > out.max_kl) out = r;
    out.pairs = nv * (nv - 1);
    out.exhaustive = true;
  } else {
    const std::uint64_t all = (d == 64) ? ~0ULL : ((1ULL << d) - 1);
    std::vector<PairKl> rows(sampled_pairs + 2);
    parallel_for(rows.size(), threads, [&](std::size_t k) {
      std::uint64_t a = 0, b = all;
      if (k == 1) std::swap(a, b);
      if (k >= 2) {
        RandomStream rng(seed, "cube-pairs", k);
        a = rng.bits() & all;
        b = rng.bits() & all;
      }
      if (a == b) return;
      rows[k] = PairKl{kl(lambda(a), lambda(b)), a, b, 0, false};
    });
    for (const auto& r : rows)
      if (r.max_kl > out.max_kl) out = r;
    out.pairs = rows.size();
    out.exhaustive = false;
  }
  out.max_kl *= n;
  return out;
}

double fano_radius(const ThetaField& center, int n, double kappa, bool isotropic) {
  const double l1 = center.l1_norm();
  if (!(l1 < 1.0)) throw PreconditionError("fano radius needs |theta'|_1 < 1");
  if (!(kappa > 0.0 && kappa < 1.0)) throw PreconditionError("kappa must lie in (0, 1)");
  if (n < 1) throw PreconditionError("n must be positive");
  const int p = center.side();
  const double denom = (isotropic ? 72.0 : 18.0) * p * p * static_cast<double>(n);
  return (1.0 - l1) * std::sqrt(kappa / denom);
}

MinimaxBound minimax_lower_bound(const NeighborhoodModel& m, const ThetaField& center, double r, int n,
                                 double sigma_sq, double kappa, bool isotropic) {
  if (!(r >= 0.0) || !(sigma_sq > 0.0)) throw PreconditionError("need r >= 0 and sigma^2 > 0");
  const int p = center.side();
  const int d = m.dim(isotropic);
  if (d > std::sqrt(static_cast<double>(n)) * p) throw PreconditionError("model dimension exceeds sqrt(n) p");
  MinimaxBound b;
  b.dimension = d;
  b.r_fano = fano_radius(center, n, kappa, isotropic);
  b.r_used = std::min(r, b.r_fano);
  b.branch = r <= b.r_fano ? "r" : "fano";
  b.value = sigma_sq * d * b.r_used * b.r_used * (1.0 - kappa) / 8.0;
  const double l1 = center.l1_norm();
  b.l_form = std::min(r * r, (1.0 - l1) * (1.0 - l1) / (static_cast<double>(n) * p * p)) * d * sigma_sq;
  b.small_dimension = d <= 1.5 * (std::sqrt(2.0) - 1.0) * std::sqrt(static_cast<double>(n) * p * p / kappa);
  return b;
}

double birge_bound(double delta, std::size_t t_size, double kappa, double power) {
  if (!(delta >= 0.0)) throw PreconditionError("delta must be nonnegative");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw PreconditionError("kappa must lie in [0, 1)");
  if (t_size < 2) throw PreconditionError("Birge's lemma needs |T| >= 2");
  if (!(power >= 1.0)) throw PreconditionError("power must be >= 1");
  return std::pow(2.0, -power) * std::pow(delta, power) * (1.0 - kappa);
}

bool birge_kl_condition(const std::vector<ThetaField>& points, int n, double kappa, double sigma_sq) {
  if (points.size() < 2) throw PreconditionError("Birge's lemma needs |T| >= 2");
  const double limit = kappa * std::log(static_cast<double>(points.size()));
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = 0; b < points.size(); ++b)
      if (a != b && n * kl_divergence(points[a], points[b], sigma_sq) > limit) return false;
  return true;
}

}  // namespace gmrf
