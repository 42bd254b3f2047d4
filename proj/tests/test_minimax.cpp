#include <doctest.h>

#include <cmath>
#include <random>

#include "gmrf/contrast.hpp"
#include "gmrf/error.hpp"
#include "gmrf/minimax.hpp"
#include "support/oracles.hpp"

using namespace gmrf;

TEST_CASE("Varshamov-Gilbert codes") {
  for (int d = 1; d <= 40; ++d) {
    const auto code = build_vg_code(d, 1);
    const auto chk = verify_vg_code(code);
    CHECK_MESSAGE(chk.ok(), "d = " << d);
    CHECK(code.words.front() == 0);
    for (auto w : code.words) CHECK((d == 64 || w < (1ULL << d)));
  }
  for (int d : {48, 62}) CHECK(verify_vg_code(build_vg_code(d, 3)).ok());
  CHECK(vg_target_size(8) == 3);
  CHECK(vg_target_size(16) == 8);
  CHECK(hamming(0b1011, 0b0110) == 3);
  CHECK_THROWS_AS(build_vg_code(0, 1), PreconditionError);
  CHECK_FALSE(verify_vg_code(VGCode{8, {0, 1}}).distance_ok);
}

TEST_CASE("hypercube construction") {
  const TorusGeometry g(8);
  const auto coll = build_model_collection(g);
  const auto& m = coll.by_index(2);
  const auto zero = ThetaField::zero(g);
  const auto cube = make_hypercube(m, zero, 0.01, false);
  CHECK(cube.dimension() == m.dim());
  CHECK(cube.margin() == doctest::Approx(1 - 2 * 0.01 * m.dim()));
  const auto v = cube.vertex(0b101);
  CHECK(v.l1_norm() == doctest::Approx(0.01 * (m.orbits_s[0].size() + m.orbits_s[2].size())));
  const auto outside = ThetaField::from_entries(g, {{3, 3, 0.1}});
  CHECK_THROWS_AS(make_hypercube(m, outside, 0.01, false), PreconditionError);
  const auto aniso = ThetaField::from_entries(g, {{1, 0, 0.1}});
  CHECK_THROWS_AS(make_hypercube(m, aniso, 0.01, true), PreconditionError);
  CHECK(make_hypercube(m, aniso, 0.01, false).vertex(0).values() == aniso.values());
}

TEST_CASE("KL bound dominates the exact vertex divergence") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p : {6, 9})
    for (bool iso : {false, true}) {
      const TorusGeometry g(p);
      const auto coll = build_model_collection(g);
      for (int mi : {1, 2, 3}) {
        const auto& m = coll.by_index(mi);
        const double r = 0.1 * u(rng) / (8.0 * m.dim(iso));
        const auto cube = make_hypercube(m, ThetaField::zero(g), r, iso);
        const auto exact = exact_max_pair_kl(cube, 7);
        CHECK(exact.exhaustive);
        CHECK(exact.max_kl > 0.0);
        CHECK(exact.max_kl <= kl_bound_hypercube(cube, 7));
        // the exhaustive maximum matches a direct evaluation on its pair
        CHECK(exact.max_kl == doctest::Approx(7 * kl_divergence(cube.vertex(exact.phi), cube.vertex(exact.psi))));
      }
    }
}

TEST_CASE("sampled pair KL for larger cubes") {
  const TorusGeometry g(12);
  const auto coll = build_model_collection(g);
  const auto& m = coll.by_index(6);
  REQUIRE(m.dim() > 10);
  const double r = 0.2 / (2.0 * m.dim());
  const auto cube = make_hypercube(m, ThetaField::zero(g), r, false);
  const auto s = exact_max_pair_kl(cube, 3, 5, 500);
  CHECK_FALSE(s.exhaustive);
  CHECK(s.max_kl <= kl_bound_hypercube(cube, 3));
  CHECK(s.max_kl == exact_max_pair_kl(cube, 3, 5, 500, 4).max_kl);
}

TEST_CASE("Frobenius and loss separation between vertices") {
  const int p = 9;
  const TorusGeometry g(p);
  const auto coll = build_model_collection(g);
  const auto& m = coll.by_index(3);
  const double r = 0.01;
  const auto cube = make_hypercube(m, ThetaField::zero(g), r, false);
  const auto code = build_vg_code(m.dim(), 2);
  for (std::size_t a = 0; a < code.words.size(); ++a)
    for (std::size_t b = a + 1; b < code.words.size(); ++b) {
      const auto ta = cube.vertex(code.words[a]), tb = cube.vertex(code.words[b]);
      const int dh = hamming(code.words[a], code.words[b]);
      const Eigen::MatrixXd diff = oracle::dense_matrix((ta - tb).values());
      CHECK(diff.squaredNorm() == doctest::Approx(2.0 * p * p * r * r * dh));
      const GmrfParams truth(tb, 1.5);
      CHECK(loss(ta, truth) >= 1.5 * r * r * dh);
      CHECK(loss(ta, truth) >= 1.5 * r * r * dh / 2);
    }
}

TEST_CASE("Fano radius and the minimax lower bound") {
  const TorusGeometry g(10);
  const auto coll = build_model_collection(g);
  const auto& m = coll.by_index(2);
  const auto c = ThetaField::from_entries(g, {{1, 0, 0.1}});
  CHECK(fano_radius(c, 50, 0.5, false) == doctest::Approx(0.8 * std::sqrt(0.5 / (18 * 100 * 50.0))));
  CHECK(fano_radius(c, 50, 0.5, true) == doctest::Approx(0.8 * std::sqrt(0.5 / (72 * 100 * 50.0))));
  CHECK_THROWS_AS(fano_radius(c, 50, 1.0, false), PreconditionError);

  const auto small = minimax_lower_bound(m, c, 1e-6, 50, 2.0, 0.5, false);
  CHECK(small.branch == "r");
  CHECK(small.value == doctest::Approx(2.0 * m.dim() * 1e-12 * 0.5 / 8));
  const auto big = minimax_lower_bound(m, c, 1.0, 50, 2.0, 0.5, false);
  CHECK(big.branch == "fano");
  CHECK(big.r_used == big.r_fano);
  CHECK(big.value <= big.l_form);

  // slope -1 in n on the Fano branch
  const double v1 = minimax_lower_bound(m, c, 1.0, 100, 1.0, 0.5, false).value;
  const double v2 = minimax_lower_bound(m, c, 1.0, 1600, 1.0, 0.5, false).value;
  CHECK(std::log(v2 / v1) / std::log(16.0) == doctest::Approx(-1.0).epsilon(1e-12));
  // linear in the dimension
  const auto& m4 = coll.by_index(4);
  const double v4 = minimax_lower_bound(m4, ThetaField::zero(g), 1.0, 100, 1.0, 0.5, false).value;
  const double v0 = minimax_lower_bound(m, ThetaField::zero(g), 1.0, 100, 1.0, 0.5, false).value;
  CHECK(v4 / v0 == doctest::Approx(static_cast<double>(m4.dim()) / m.dim()));
  CHECK_THROWS_AS(minimax_lower_bound(coll.models.back(), ThetaField::zero(g), 1.0, 1, 1.0, 0.5, false),
                  PreconditionError);
}

TEST_CASE("Fano-radius vertices satisfy the KL condition") {
  const TorusGeometry g(8);
  const auto coll = build_model_collection(g);
  for (int mi : {2, 3, 5}) {
    const auto& m = coll.by_index(mi);
    const int n = 40;
    const double kappa = 0.5;
    const double r = fano_radius(ThetaField::zero(g), n, kappa, false);
    const auto cube = make_hypercube(m, ThetaField::zero(g), r, false);
    const auto code = build_vg_code(m.dim(), 7);
    std::vector<ThetaField> pts;
    for (auto w : code.words) pts.push_back(cube.vertex(w));
    if (pts.size() < 2) continue;
    CHECK(birge_kl_condition(pts, n, kappa));
  }
}

TEST_CASE("Birge bound") {
  CHECK(birge_bound(0.4, 5, 0.5, 2.0) == doctest::Approx(0.25 * 0.16 * 0.5));
  CHECK(birge_bound(1.0, 2, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(birge_bound(1.0, 1, 0.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(birge_bound(1.0, 2, 1.0, 1.0), PreconditionError);
}
