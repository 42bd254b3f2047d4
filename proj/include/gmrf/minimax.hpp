#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmrf/field.hpp"

namespace gmrf {

/// Vertices theta' + r sum_k phi_k Psi_k, phi in {0,1}^d, over the orbits of m.
struct Hypercube {
  NeighborhoodModel model;
  ThetaField center;
  double radius = 0.0;
  bool isotropic = false;

  int dimension() const { return model.dim(isotropic); }
  /// 1 - |theta'|_1 - 2 r d (anisotropic) or 1 - |theta'|_1 - 8 r d_iso (isotropic).
  double margin() const;
  ThetaField vertex(std::uint64_t phi) const;
};

/// Throws PreconditionError when the centre is not supported on m (or not
/// isotropic on m when `isotropic`), or d > 62.
Hypercube make_hypercube(const NeighborhoodModel& m, const ThetaField& center, double r, bool isotropic);

/// Binary code with pairwise Hamming distance > d/4 and log|words| >= d/8.
/// Words are bit masks over d <= 64 coordinates.
struct VGCode {
  int d = 0;
  std::vector<std::uint64_t> words;
};

std::size_t vg_target_size(int d);
int hamming(std::uint64_t a, std::uint64_t b);

/// Random greedy search (budget 64 * 2^{d/8} candidates), then lexicographic
/// greedy over {0,1}^d when d <= 24. Throws PreconditionError if both fail.
VGCode build_vg_code(int d, std::uint64_t seed);

struct VGCheck {
  int min_distance = 0;
  std::size_t size = 0;
  bool distance_ok = false;
  bool size_ok = false;
  bool ok() const { return distance_ok && size_ok; }
};

/// Exhaustive pairwise verification.
VGCheck verify_vg_code(const VGCode& code);

/// n times the KL bound over any vertex pair:
///   anisotropic 9 d r^2 p^2 n / (8 margin^2), isotropic 9 d_m r^2 p^2 n / (2 margin^2).
double kl_bound_hypercube(const Hypercube& cube, int n);

struct PairKl {
  double max_kl = 0.0;  // n * max KL over the examined ordered pairs
  std::uint64_t phi = 0, psi = 0;
  std::size_t pairs = 0;
  bool exhaustive = false;
};

/// Exhaustive over all ordered pairs for d <= 10, otherwise `sampled_pairs`
/// random pairs plus the pair (0, 1...1).
PairKl exact_max_pair_kl(const Hypercube& cube, int n, std::uint64_t seed = 0, std::size_t sampled_pairs = 20000,
                         int threads = 0);

/// Largest admissible radius r with r^2 = kappa (1 - |theta'|_1)^2 / (18 p^2 n)
/// (anisotropic) or kappa (1 - |theta'|_1)^2 / (72 p^2 n) (isotropic).
double fano_radius(const ThetaField& center, int n, double kappa, bool isotropic);

struct MinimaxBound {
  double value = 0.0;      // sigma^2 d min(r, r_fano)^2 (1 - kappa) / 8
  double r_used = 0.0;
  double r_fano = 0.0;
  std::string branch;      // "r" or "fano"
  double l_form = 0.0;     // (r^2 min (1 - |theta'|_1)^2 / (n p^2)) d sigma^2
  int dimension = 0;
  bool small_dimension = false;  // d <= 1.5 (sqrt2 - 1) sqrt(n p^2 / kappa)
};

MinimaxBound minimax_lower_bound(const NeighborhoodModel& m, const ThetaField& center, double r, int n,
                                 double sigma_sq, double kappa, bool isotropic);

/// 2^{-power} delta^power (1 - kappa).
double birge_bound(double delta, std::size_t t_size, double kappa, double power);

/// max over pairs of n KL(theta_a, theta_b) <= kappa log |T|.
bool birge_kl_condition(const std::vector<ThetaField>& points, int n, double kappa, double sigma_sq = 1.0);

}  // namespace gmrf
