#include "gmrf/chaos.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gmrf/error.hpp"
#include "gmrf/parallel.hpp"
#include "gmrf/rng.hpp"

namespace gmrf {

Eigen::MatrixXd ChaosElement::doubled() const {
  Eigen::MatrixXd M = coeffs;
  M.diagonal() *= 2.0;
  return M;
}

void validate_family(const ChaosFamily& family) {
  if (family.N < 1) throw PreconditionError("chaos family needs N >= 1");
  if (family.elements.empty()) throw PreconditionError("chaos family is empty");
  for (const auto& e : family.elements) {
    if (e.coeffs.rows() != family.N || e.coeffs.cols() != family.N)
      throw PreconditionError("chaos element size does not match N");
    if (!e.coeffs.allFinite() || !std::isfinite(e.constant)) throw PreconditionError("chaos element is not finite");
    const double scale = std::max(1.0, e.coeffs.cwiseAbs().maxCoeff());
    if ((e.coeffs - e.coeffs.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw PreconditionError("chaos coefficients must be symmetric");
  }
}

double chaos_value(const ChaosElement& t, const Eigen::VectorXd& y) {
  if (y.size() != t.coeffs.rows()) throw PreconditionError("chaos dimension mismatch");
  return 0.5 * y.dot(t.doubled() * y) + t.constant;
}

double chaos_supremum(const ChaosFamily& family, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (const auto& e : family.elements) s = std::max(s, std::abs(chaos_value(e, y)));
  return s;
}

double operator_E(const ChaosFamily& family) {
  double best = 0.0;
  for (const auto& e : family.elements) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(e.doubled(), Eigen::EigenvaluesOnly);
    best = std::max(best, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

double functional_D(const ChaosFamily& family, const Eigen::VectorXd& y) {
  double best = 0.0;
  for (const auto& e : family.elements) {
    if (y.size() != e.coeffs.rows()) throw PreconditionError("chaos dimension mismatch");
    best = std::max(best, (e.doubled() * y).norm());
  }
  return best;
}

ChaosElement matrix_family_element(const Eigen::MatrixXd& R, int n) {
  if (n < 1 || R.rows() != R.cols()) throw PreconditionError("matrix family needs square R and n >= 1");
  const auto r = R.rows();
  ChaosElement t;
  t.coeffs = Eigen::MatrixXd::Zero(r * n, r * n);
  for (int k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < r; ++j)
        t.coeffs(k * r + i, k * r + j) = (i == j ? 1.0 : 2.0) * R(i, j) / n;
  t.constant = -R.trace();
  return t;
}

double chaos_tail_bound(double x, double e_D, double E, double L1, double L2) {
  const double inf = std::numeric_limits<double>::infinity();
  const double a = e_D > 0.0 ? x * x / (e_D * e_D * L1) : inf;
  const double b = E > 0.0 ? x / (E * L2) : inf;
  return std::exp(-std::min(a, b));
}

std::vector<double> fit_grid_constants() {
  std::vector<double> g;
  for (int e = -4; e <= 10; ++e) g.push_back(std::ldexp(1.0, e));
  return g;
}

TailReport tail_experiment(const ChaosFamily& family, int n_mc, const std::vector<double>& x_grid,
                           std::uint64_t seed, ChaosMode mode, int block, int threads) {
  validate_family(family);
  if (n_mc < 1) throw PreconditionError("n_mc must be positive");
  if (block < 1) throw PreconditionError("block size must be positive");
  const int N = family.N;
  std::vector<double> T(static_cast<std::size_t>(n_mc)), D(static_cast<std::size_t>(n_mc));
  std::vector<Eigen::MatrixXd> M;
  for (const auto& e : family.elements) M.push_back(e.doubled());

  parallel_for(static_cast<std::size_t>(n_mc), threads, [&](std::size_t k) {
    RandomStream rng(seed, mode == ChaosMode::gaussian ? "chaos-gauss" : "chaos-rade", k);
    Eigen::VectorXd y(N);
    for (int i = 0; i < N; ++i) {
      if (mode == ChaosMode::gaussian) {
        y[i] = rng.gaussian();
      } else {
        double s = 0.0;
        for (int b = 0; b < block; ++b) s += rng.rademacher();
        y[i] = s / std::sqrt(static_cast<double>(block));
      }
    }
    double t = 0.0, d = 0.0;
    for (std::size_t e = 0; e < M.size(); ++e) {
      const Eigen::VectorXd My = M[e] * y;
      t = std::max(t, std::abs(0.5 * y.dot(My) + family.elements[e].constant));
      d = std::max(d, My.norm());
    }
    T[k] = t;
    D[k] = d;
  });

  TailReport rep;
  rep.mode = mode;
  rep.block = block;
  rep.n_mc = n_mc;
  rep.seed = seed;
  rep.E_const = operator_E(family);
  double sum_t = 0.0, sum_t2 = 0.0, sum_d = 0.0;
  for (std::size_t k = 0; k < T.size(); ++k) {
    sum_t += T[k];
    sum_t2 += T[k] * T[k];
    sum_d += D[k];
  }
  rep.e_T = sum_t / n_mc;
  rep.e_T_se = std::sqrt(std::max(sum_t2 / n_mc - rep.e_T * rep.e_T, 0.0) / n_mc);
  rep.e_D = sum_d / n_mc;

  std::vector<double> sorted = T;
  std::sort(sorted.begin(), sorted.end());
  for (double x : x_grid) {
    const double thr = rep.e_T + x;
    const auto count = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), thr));
    TailPoint pt;
    pt.x = x;
    pt.empirical = count / n_mc;
    pt.std_error = std::sqrt(pt.empirical * (1.0 - pt.empirical) / n_mc);
    pt.censored = count < 50.0;
    rep.points.push_back(pt);
  }

  const auto grid = fit_grid_constants();
  double best_prod = std::numeric_limits<double>::infinity();
  for (double L1 : grid)
    for (double L2 : grid) {
      bool ok = true;
      for (const auto& pt : rep.points)
        if (pt.x > 0.0 && chaos_tail_bound(pt.x, rep.e_D, rep.E_const, L1, L2) < pt.empirical + 2.0 * pt.std_error) {
          ok = false;
          break;
        }
      if (ok && (L1 * L2 < best_prod || (L1 * L2 == best_prod && L1 < rep.L1))) {
        best_prod = L1 * L2;
        rep.L1 = L1;
        rep.L2 = L2;
        rep.fitted = true;
      }
    }
  for (auto& pt : rep.points)
    pt.bound = rep.fitted ? chaos_tail_bound(pt.x, rep.e_D, rep.E_const, rep.L1, rep.L2) : 1.0;
  return rep;
}

ChaosFamily chaos_family_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("chaos family is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("N") || !doc["N"].is_number_integer() || !doc.contains("elements") ||
      !doc["elements"].is_array())
    throw FormatError("chaos family needs integer \"N\" and array \"elements\"");
  ChaosFamily fam;
  fam.N = doc["N"].get<int>();
  if (fam.N < 1) throw FormatError("chaos family: N must be positive");
  for (const auto& e : doc["elements"]) {
    ChaosElement el;
    el.coeffs = Eigen::MatrixXd::Zero(fam.N, fam.N);
    el.constant = e.value("constant", 0.0);
    if (e.contains("coeffs")) {
      const auto& rows = e["coeffs"];
      if (!rows.is_array() || static_cast<int>(rows.size()) != fam.N)
        throw FormatError("chaos element: \"coeffs\" must be an N x N array");
      for (int i = 0; i < fam.N; ++i) {
        if (!rows[static_cast<std::size_t>(i)].is_array() || static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != fam.N)
          throw FormatError("chaos element: \"coeffs\" must be an N x N array");
        for (int j = 0; j < fam.N; ++j) el.coeffs(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
      }
    }
    fam.elements.push_back(std::move(el));
  }
  try {
    validate_family(fam);
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("chaos family: ") + e.what());
  }
  return fam;
}

std::string chaos_family_to_json(const ChaosFamily& family) {
  nlohmann::json elems = nlohmann::json::array();
  for (const auto& e : family.elements) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < e.dim(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < e.dim(); ++j) row.push_back(e.coeffs(i, j));
      rows.push_back(row);
    }
    elems.push_back({{"coeffs", rows}, {"constant", e.constant}});
  }
  return nlohmann::json{{"N", family.N}, {"elements", elems}}.dump(2) + "\n";
}

namespace {

// Orthonormal basis (columns) of the span of A's columns, rank tolerance relative to the top singular value.
Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& A, double rel_tol) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return Eigen::MatrixXd(A.rows(), 0);
  Eigen::Index r = 0;
  while (r < s.size() && s[r] > rel_tol * s[0]) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

ModelPairStats model_pair_stats(const GmrfParams& params, const NeighborhoodModel& m,
                                const NeighborhoodModel& m_prime, int n, int n_mc, std::uint64_t seed,
                                int threads) {
  if (n < 1 || n_mc < 2) throw PreconditionError("model_pair_stats needs n >= 1 and n_mc >= 2");
  const TorusGeometry& geom = params.geometry();
  const int p = geom.side();
  const auto np2 = static_cast<Eigen::Index>(p) * p;

  std::vector<LatticePoint> pts = m.points;
  pts.insert(pts.end(), m_prime.points.begin(), m_prime.points.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const auto orbits = orbit_decomposition(geom, pts, Symmetry::central);

  std::vector<Eigen::VectorXd> b;
  for (const auto& o : orbits) {
    const Grid s = spectrum_of_grid(orbit_indicator(geom, o)).lam;
    b.emplace_back(Eigen::Map<const Eigen::VectorXd>(s.values().data(), np2));
  }
  const auto nb = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd A(np2, nb + nb * (nb + 1) / 2);
  Eigen::Index col = 0;
  for (const auto& v : b) A.col(col++) = v;
  for (Eigen::Index k = 0; k < nb; ++k)
    for (Eigen::Index l = k; l < nb; ++l) A.col(col++) = b[static_cast<std::size_t>(k)].cwiseProduct(b[static_cast<std::size_t>(l)]);

  const Grid& dgrid = cov_spectrum(params).dsig.lam;
  const Eigen::VectorXd Dv = Eigen::Map<const Eigen::VectorXd>(dgrid.values().data(), np2);
  const Eigen::VectorXd w = Dv.cwiseSqrt() / p;
  const Eigen::MatrixXd Aw = w.asDiagonal() * A;
  const Eigen::MatrixXd F = orthonormal_span(Aw, 1e-10);  // U'
  const Eigen::MatrixXd G = orthonormal_span(A, 1e-10);   // U
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Aw);

  ModelPairStats st;
  st.rank = static_cast<int>(F.cols());
  st.phi_max = Dv.maxCoeff();
  st.n = n;
  st.n_mc = n_mc;
  const double dn = n, dp2 = static_cast<double>(np2), d = st.rank;

  const Eigen::VectorXd rowsq = F.rowwise().squaredNorm();  // sum_i F_ij^2
  st.ez2_exact = 2.0 / (dn * dp2) * rowsq.dot(Dv);
  st.ez2_bound = 2.0 * d * st.phi_max / (dn * dp2);
  st.b_exact = 2.0 / dn * (rowsq.cwiseProduct(Dv)).cwiseSqrt().maxCoeff() / p;
  st.b_bound = 2.0 * std::sqrt(st.phi_max) / (dn * p);
  st.ew_bound = 4.0 * st.phi_max / (dn * dp2) * (1.0 + std::sqrt(2.0 * d / dn));
  st.sum_ff = rowsq.squaredNorm();

  const std::size_t reps = static_cast<std::size_t>(n_mc);
  const std::size_t identity_reps = std::min<std::size_t>(reps, 200);
  std::vector<double> zs(reps), z2s(reps), ws(reps), gaps(identity_reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t k) {
    RandomStream rng(seed, "pair-stats", k);
    std::mt19937_64 eng(rng.bits());
    std::chi_squared_distribution<double> chi(dn);
    Eigen::VectorXd ybar(np2);
    for (Eigen::Index j = 0; j < np2; ++j) ybar[j] = chi(eng) / dn;
    const Eigen::VectorXd z = w.cwiseProduct(ybar - Eigen::VectorXd::Ones(np2));
    const double z2 = (F.transpose() * z).squaredNorm();
    zs[k] = std::sqrt(z2);
    z2s[k] = z2;
    const Eigen::MatrixXd Mw = G.transpose() * ybar.cwiseProduct(Dv).asDiagonal() * G;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Mw, Eigen::EigenvaluesOnly);
    ws[k] = 4.0 / (dn * dp2) * (Mw.size() ? eig.eigenvalues().maxCoeff() : 0.0);
    if (k < identity_reps) {
      const Eigen::VectorXd proj = Aw * cod.solve(z);
      gaps[k] = std::abs(proj.squaredNorm() - z2) / std::max(z2, 1e-300);
    }
  });

  auto mean_se = [](const std::vector<double>& v) {
    double s = 0.0, s2 = 0.0;
    for (double x : v) {
      s += x;
      s2 += x * x;
    }
    const double m = s / static_cast<double>(v.size());
    const double var = std::max(s2 / static_cast<double>(v.size()) - m * m, 0.0);
    return std::pair{m, std::sqrt(var / static_cast<double>(v.size() - 1))};
  };
  st.ez = mean_se(zs).first;
  std::tie(st.ez2, st.ez2_se) = mean_se(z2s);
  std::tie(st.ew, st.ew_se) = mean_se(ws);
  st.z2_identity_gap = *std::max_element(gaps.begin(), gaps.end());

  st.ez2_ok = st.ez2 - 2.0 * st.ez2_se <= st.ez2_bound;
  st.b_ok = st.b_exact <= st.b_bound * (1.0 + 1e-12);
  st.ew_ok = st.ew - 2.0 * st.ew_se <= st.ew_bound;
  st.jensen_ok = st.ez <= std::sqrt(st.ez2) * (1.0 + 1e-12);
  st.exact_ok = std::abs(st.ez2 - st.ez2_exact) <= 2.0 * st.ez2_se;
  return st;
}

}  // namespace gmrf
