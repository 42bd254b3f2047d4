#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gmrf/circulant.hpp"
#include "gmrf/error.hpp"
#include "support/oracles.hpp"

using namespace gmrf;

namespace {

ThetaField four_nn(int p, double a) {
  return ThetaField::from_entries(TorusGeometry(p), {{1, 0, a}, {0, 1, a}});
}

}  // namespace

TEST_CASE("theta field invariants") {
  const TorusGeometry g(5);
  Grid bad(5);
  bad(1, 0) = 0.3;
  CHECK_THROWS_AS(ThetaField(g, bad), PreconditionError);
  bad(-1, 0) = 0.3;
  CHECK_NOTHROW(ThetaField(g, bad));
  bad(0, 0) = 0.1;
  CHECK_THROWS_AS(ThetaField(g, bad), PreconditionError);
  const auto t = ThetaField::from_entries(g, {{1, 2, 0.25}, {0, 1, -0.1}});
  CHECK(t(-1, -2) == 0.25);
  CHECK(t(0, -1) == -0.1);
  CHECK(t.l1_norm() == doctest::Approx(0.7));
  CHECK_THROWS_AS(ThetaField::from_entries(g, {{1, 0, 0.2}, {-1, 0, 0.3}}), FormatError);
}

TEST_CASE("spectrum of C") {
  SUBCASE("zero field") {
    const auto s = precision_spectrum(ThetaField::zero(TorusGeometry(6)));
    for (double v : s.lam.values()) CHECK(v == 1.0);
  }
  SUBCASE("four nearest neighbours closed form") {
    const int p = 8;
    const double a = 0.2;
    const auto s = precision_spectrum(four_nn(p, a));
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        CHECK(s(i, j) == doctest::Approx(1 - 2 * a * (std::cos(2 * std::numbers::pi * i / p) +
                                                    std::cos(2 * std::numbers::pi * j / p)))
                              .epsilon(1e-14));
  }
  SUBCASE("dense eigenvalues, p = 3..8") {
    std::mt19937_64 rng(11);
    for (int p = 3; p <= 8; ++p)
      for (int rep = 0; rep < 5; ++rep) {
        const auto t = oracle::random_theta(p, 0.9, rng);
        const Eigen::VectorXd dense = oracle::sorted_eigenvalues(oracle::dense_matrix(t.values()));
        const Grid mu = spectrum_of_C(t).lam;
        std::vector<double> v(mu.values().begin(), mu.values().end());
        std::sort(v.begin(), v.end());
        for (std::size_t k = 0; k < v.size(); ++k) CHECK(std::abs(v[k] - dense[static_cast<Eigen::Index>(k)]) < 1e-10);
      }
  }
  SUBCASE("linearity") {
    std::mt19937_64 rng(3);
    const auto a = oracle::random_theta(7, 1.0, rng), b = oracle::random_theta(7, 2.0, rng);
    const Grid lhs = spectrum_of_C(1.5 * a + (-0.5) * b).lam;
    const Grid rhs = 1.5 * spectrum_of_C(a).lam - 0.5 * spectrum_of_C(b).lam;
    for (std::size_t k = 0; k < lhs.size(); ++k) CHECK(std::abs(lhs.values()[k] - rhs.values()[k]) < 1e-12);
  }
  SUBCASE("diagonal dominance") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
      const double l1 = 0.95 * (rep + 1) / 50.0;
      const auto t = oracle::random_theta(6, l1, rng);
      const auto [lo, hi] = phi_extremes(precision_spectrum(t));
      CHECK(lo >= 1 - l1 - 1e-12);
      CHECK(hi <= 1 + l1 + 1e-12);
      CHECK(hi <= 2.0);
    }
  }
}

TEST_CASE("dense block-circulant round trip") {
  CHECK(dense_C(ThetaField::zero(TorusGeometry(4))).isZero());
  const auto psi = make_basis_element(TorusGeometry(3), {1, 0}, BasisKind::anisotropic);
  const Eigen::MatrixXd C = dense_C(psi.field);
  CHECK(C == C.transpose());
  for (Eigen::Index r = 0; r < C.rows(); ++r) CHECK(C.row(r).sum() == 2.0);
  CHECK(C == oracle::dense_matrix(psi.field.values()));

  std::mt19937_64 rng(7);
  const auto t = oracle::random_theta(5, 0.8, rng);
  CHECK(theta_of_dense(dense_C(t)).values() == t.values());
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(25, 25) - dense_C(t);
  CHECK((theta_of_dense(P, true).values() - t.values()).values().size() == 25);
  for (std::size_t k = 0; k < 25; ++k)
    CHECK(std::abs(theta_of_dense(P, true).values().values()[k] - t.values().values()[k]) < 1e-15);

  CHECK_THROWS_AS(theta_of_dense(Eigen::MatrixXd::Identity(16, 16)), PreconditionError);
  Eigen::MatrixXd bad = dense_C(t);
  bad(3, 7) += 1e-6;
  bad(7, 3) += 1e-6;
  CHECK_THROWS_AS(theta_of_dense(bad), PreconditionError);
  CHECK_THROWS_AS(dense_C(ThetaField::zero(TorusGeometry(13))), DenseLimitExceeded);
}

TEST_CASE("basis elements") {
  const TorusGeometry g(6);
  const auto a = make_basis_element(g, {1, 2}, BasisKind::anisotropic);
  CHECK(a.orbit_size == 2);
  CHECK(a.frobenius_sq == 2.0 * 36);
  CHECK(dense_C(a.field).squaredNorm() == a.frobenius_sq);
  const auto fixed = make_basis_element(g, {3, 0}, BasisKind::anisotropic);
  CHECK(fixed.orbit_size == 1);
  CHECK(fixed.field.values().sum() == 1.0);
  CHECK_THROWS_AS(make_basis_element(g, {0, 0}, BasisKind::anisotropic), PreconditionError);
  for (int p : {3, 5, 8, 11}) {
    const auto h = make_basis_element(TorusGeometry(p), {1, 0}, BasisKind::isotropic);
    const Grid s = spectrum_of_C(h.field).lam;
    double tr = 0;
    for (double v : s.values()) tr += v * v;
    CHECK(tr == doctest::Approx(4.0 * p * p).epsilon(1e-13));
  }
}

TEST_CASE("product identity") {
  auto el = [](int p, int i, int j) { return make_basis_element(TorusGeometry(p), {i, j}, BasisKind::anisotropic); };
  CHECK(product_identity_check(el(5, 1, 0), el(5, 0, 1)) < 1e-12);
  CHECK(product_identity_check(el(4, 2, 0), el(4, 2, 0)) < 1e-12);
  CHECK(product_identity_check(el(7, 1, 0), el(7, 1, 0)) < 1e-12);
  for (int p : {4, 6})
    for (int i1 = 0; i1 < p; ++i1)
      for (int j1 = 0; j1 < p; ++j1)
        for (int i2 = 0; i2 < p; i2 += 2)
          for (int j2 = 0; j2 < p; j2 += 3) {
            if ((!i1 && !j1) || (!i2 && !j2)) continue;
            CHECK(product_identity_check(el(p, i1, j1), el(p, i2, j2)) < 1e-12);
          }
}

TEST_CASE("phi extremes") {
  CHECK(phi_extremes(SpectrumGrid{Grid(4, 2.5)}) == std::pair{2.5, 2.5});
  Grid d = precision_spectrum(four_nn(8, 0.2)).lam;
  for (double& v : d.values()) v = 1.0 / v;
  CHECK(phi_extremes(SpectrumGrid{d}).second == doctest::Approx(1.0 / (1 - 4 * 0.2)));
}

TEST_CASE("theta json round trip") {
  std::mt19937_64 rng(9);
  const auto t = oracle::random_theta(6, 0.7, rng);
  const auto back = theta_from_json(theta_to_json(t));
  CHECK(back.values() == t.values());
  CHECK_THROWS_AS(theta_from_json("{\"p\": 4, \"entries\": [[1, 0]]}"), FormatError);
  CHECK_THROWS_AS(theta_from_json("not json"), FormatError);
  CHECK_THROWS_AS(theta_from_json("{\"p\": 4, \"entries\": [[0, 0, 0.5]]}"), FormatError);
}
