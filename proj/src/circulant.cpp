#include "gmrf/circulant.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>

#include "gmrf/error.hpp"
#include "gmrf/fft.hpp"

namespace gmrf {

ThetaField::ThetaField(const TorusGeometry& geom, Grid values, double tol)
    : geom_(geom), values_(std::move(values)) {
  const int p = geom_.side();
  if (values_.side() != p) throw PreconditionError("theta grid side does not match geometry");
  double scale = 1.0;
  for (double v : values_.values()) {
    if (!std::isfinite(v)) throw PreconditionError("theta has non-finite entries");
    scale = std::max(scale, std::abs(v));
  }
  if (std::abs(values_(0, 0)) > tol * scale) throw PreconditionError("theta[0,0] must be zero");
  if (values_.asymmetry() > tol * scale) throw PreconditionError("theta must satisfy theta[i,j] = theta[-i,-j]");
  Grid sym(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) sym(i, j) = 0.5 * (values_(i, j) + values_(-i, -j));
  sym(0, 0) = 0.0;
  values_ = std::move(sym);
}

ThetaField ThetaField::zero(const TorusGeometry& geom) { return ThetaField(geom, Grid(geom.side())); }

ThetaField ThetaField::from_entries(const TorusGeometry& geom,
                                    const std::vector<std::tuple<int, int, double>>& entries) {
  const int p = geom.side();
  Grid g(p);
  std::vector<bool> seen(static_cast<std::size_t>(p) * p, false);
  for (const auto& [i, j, v] : entries) {
    const LatticePoint x = geom.normalize({i, j});
    if (x == LatticePoint{0, 0}) {
      if (v != 0.0) throw FormatError("theta entry at the origin must be zero");
      continue;
    }
    const LatticePoint y = geom.reflect(x);
    const std::size_t kx = geom.linear_index(x);
    if (seen[kx] && g(x.i, x.j) != v)
      throw FormatError("conflicting theta entries for orbit of (" + std::to_string(x.i) + "," +
                        std::to_string(x.j) + ")");
    g(x.i, x.j) = v;
    g(y.i, y.j) = v;
    seen[kx] = true;
    seen[geom.linear_index(y)] = true;
  }
  return ThetaField(geom, std::move(g));
}

double ThetaField::l1_norm() const {
  double s = 0.0;
  for (double v : values_.values()) s += std::abs(v);
  return s;
}

int ThetaField::support_size() const {
  return static_cast<int>(std::count_if(values_.values().begin(), values_.values().end(),
                                        [](double v) { return v != 0.0; }));
}

ThetaField& ThetaField::operator+=(const ThetaField& o) {
  if (!(o.geom_ == geom_)) throw PreconditionError("theta geometry mismatch");
  values_ += o.values_;
  return *this;
}

ThetaField& ThetaField::operator-=(const ThetaField& o) {
  if (!(o.geom_ == geom_)) throw PreconditionError("theta geometry mismatch");
  values_ -= o.values_;
  return *this;
}

ThetaField& ThetaField::operator*=(double s) {
  values_ *= s;
  return *this;
}

Grid orbit_indicator(const TorusGeometry& geom, const OrbitClass& orbit) {
  Grid g(geom.side());
  for (const auto& x : orbit.members) g(x.i, x.j) = 1.0;
  return g;
}

BasisElement make_basis_element(const TorusGeometry& geom, LatticePoint x, BasisKind kind) {
  x = geom.normalize(x);
  if (x == LatticePoint{0, 0}) throw PreconditionError("basis element at the origin is not a valid theta");
  std::vector<LatticePoint> pts;
  if (kind == BasisKind::anisotropic) {
    pts = {x, geom.reflect(x)};
  } else {
    const auto imgs = geom.dihedral_images(x);
    pts.assign(imgs.begin(), imgs.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  OrbitClass orbit{pts.front(), pts};
  const int p = geom.side();
  return BasisElement{kind, orbit.representative, ThetaField(geom, orbit_indicator(geom, orbit)),
                      static_cast<int>(orbit.size()), static_cast<double>(orbit.size()) * p * p};
}

SpectrumGrid spectrum_of_grid(const Grid& g) { return SpectrumGrid{cosine_transform(g)}; }

SpectrumGrid spectrum_of_C(const ThetaField& theta) { return spectrum_of_grid(theta.values()); }

SpectrumGrid precision_spectrum(const ThetaField& theta) {
  SpectrumGrid s = spectrum_of_C(theta);
  for (double& v : s.lam.values()) v = 1.0 - v;
  return s;
}

Eigen::MatrixXd dense_block_circulant(const Grid& g, int limit) {
  const int p = g.side();
  if (p > limit)
    throw DenseLimitExceeded("dense p^2 x p^2 matrix requested for p=" + std::to_string(p) + " above limit " +
                             std::to_string(limit));
  const int n = p * p;
  Eigen::MatrixXd B(n, n);
  for (int i1 = 0; i1 < p; ++i1)
    for (int j1 = 0; j1 < p; ++j1)
      for (int i2 = 0; i2 < p; ++i2)
        for (int j2 = 0; j2 < p; ++j2) B(i1 * p + j1, i2 * p + j2) = g(i2 - i1, j2 - j1);
  return B;
}

Eigen::MatrixXd dense_C(const ThetaField& theta, int limit) { return dense_block_circulant(theta.values(), limit); }

ThetaField theta_of_dense(const Eigen::MatrixXd& B, bool strip_identity, double tol) {
  const auto n = B.rows();
  if (B.cols() != n) throw PreconditionError("matrix is not square");
  const int p = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (static_cast<Eigen::Index>(p) * p != n || p < 2) throw PreconditionError("matrix size is not p^2 with p >= 2");
  const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > tol * scale) throw PreconditionError("matrix is not symmetric");

  Grid g(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) g(i, j) = B(0, i * p + j);
  if (strip_identity) {
    g *= -1.0;
    g(0, 0) += 1.0;
  }
  Eigen::MatrixXd rebuilt = dense_block_circulant(g, p);
  if (strip_identity) rebuilt = Eigen::MatrixXd::Identity(n, n) - rebuilt;
  if ((rebuilt - B).cwiseAbs().maxCoeff() > tol * scale) throw PreconditionError("matrix is not block circulant");
  if (std::abs(g(0, 0)) > tol * scale)
    throw PreconditionError("diagonal implies theta[0,0] != 0; pass strip_identity for I - C(theta)");
  return ThetaField(TorusGeometry(p), std::move(g), tol);
}

namespace {

Grid anisotropic_indicator(const TorusGeometry& geom, LatticePoint x) {
  Grid g(geom.side());
  const LatticePoint a = geom.normalize(x);
  const LatticePoint b = geom.reflect(a);
  g(a.i, a.j) = 1.0;
  g(b.i, b.j) = 1.0;
  return g;
}

}  // namespace

double product_identity_check(const BasisElement& a, const BasisElement& b, int limit) {
  if (a.kind != BasisKind::anisotropic || b.kind != BasisKind::anisotropic)
    throw PreconditionError("product identity is stated for anisotropic basis elements");
  const TorusGeometry& geom = a.field.geometry();
  const LatticePoint x = a.representative;
  const LatticePoint y = b.representative;
  const LatticePoint sum = geom.add(x, y);
  const LatticePoint diff = geom.sub(x, y);
  auto weight = [&geom](LatticePoint z) { return geom.self_symmetric(z) ? 2.0 : 1.0; };

  const Eigen::MatrixXd lhs = dense_block_circulant(a.field.values(), limit) *
                              dense_block_circulant(b.field.values(), limit) * (weight(x) * weight(y));
  const Eigen::MatrixXd rhs = weight(sum) * dense_block_circulant(anisotropic_indicator(geom, sum), limit) +
                              weight(diff) * dense_block_circulant(anisotropic_indicator(geom, diff), limit);
  return (lhs - rhs).norm();
}

std::pair<double, double> phi_extremes(const SpectrumGrid& spec) { return {spec.lam.min(), spec.lam.max()}; }

ThetaField theta_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("theta document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("p") || !doc["p"].is_number_integer())
    throw FormatError("theta document needs an integer field \"p\"");
  const int p = doc["p"].get<int>();
  if (p < 2) throw FormatError("theta document: p must be >= 2");
  std::vector<std::tuple<int, int, double>> entries;
  if (doc.contains("entries")) {
    if (!doc["entries"].is_array()) throw FormatError("theta document: \"entries\" must be an array");
    for (const auto& e : doc["entries"]) {
      if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
          !e[2].is_number())
        throw FormatError("theta document: each entry must be [i, j, value]");
      entries.emplace_back(e[0].get<int>(), e[1].get<int>(), e[2].get<double>());
    }
  }
  try {
    return ThetaField::from_entries(TorusGeometry(p), entries);
  } catch (const FormatError&) {
    throw;
  } catch (const PreconditionError& e) {
    throw FormatError(std::string("theta document: ") + e.what());
  }
}

std::string theta_to_json(const ThetaField& theta) {
  const TorusGeometry& geom = theta.geometry();
  const int p = geom.side();
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const LatticePoint x{i, j};
      if (geom.reflect(x) < x) continue;
      const double v = theta(i, j);
      if (v != 0.0) entries.push_back({i, j, v});
    }
  nlohmann::json doc{{"p", p}, {"entries", entries}};
  return doc.dump(2) + "\n";
}

}  // namespace gmrf
