#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "gmrf/grid.hpp"
#include "gmrf/torus.hpp"

namespace gmrf {

inline constexpr int kDenseLimit = 12;

/// Parameter grid theta of the block-circulant operator C(theta).
///
/// Invariants: theta[0,0] = 0 and theta[i,j] = theta[-i,-j]. The constructor
/// accepts grids that satisfy both up to `tol` and then enforces them exactly.
class ThetaField {
 public:
  ThetaField(const TorusGeometry& geom, Grid values, double tol = 1e-12);

  static ThetaField zero(const TorusGeometry& geom);
  /// Sets theta at (i, j) and (-i, -j). Conflicting duplicates throw FormatError.
  static ThetaField from_entries(const TorusGeometry& geom,
                                 const std::vector<std::tuple<int, int, double>>& entries);

  const TorusGeometry& geometry() const { return geom_; }
  int side() const { return geom_.side(); }
  const Grid& values() const { return values_; }
  double operator()(int i, int j) const { return values_(i, j); }

  /// Sum of |theta[i,j]| over all nodes; an s-orbit of size 2 counts twice.
  double l1_norm() const;
  /// Support size (nonzero entries).
  int support_size() const;

  ThetaField& operator+=(const ThetaField& o);
  ThetaField& operator-=(const ThetaField& o);
  ThetaField& operator*=(double s);
  friend ThetaField operator+(ThetaField a, const ThetaField& b) { return a += b; }
  friend ThetaField operator-(ThetaField a, const ThetaField& b) { return a -= b; }
  friend ThetaField operator*(ThetaField a, double s) { return a *= s; }
  friend ThetaField operator*(double s, ThetaField a) { return a *= s; }

 private:
  TorusGeometry geom_;
  Grid values_;
};

enum class BasisKind { anisotropic, isotropic };

/// Orbit indicator Psi: 1 on the s-orbit (anisotropic) or G-orbit (isotropic)
/// of the representative, 0 elsewhere.
struct BasisElement {
  BasisKind kind = BasisKind::anisotropic;
  LatticePoint representative;
  ThetaField field;
  int orbit_size = 0;
  double frobenius_sq = 0.0;  // ||C(Psi)||_F^2 = orbit_size * p^2
};

/// Throws PreconditionError for the origin.
BasisElement make_basis_element(const TorusGeometry& geom, LatticePoint x, BasisKind kind);

/// Indicator grid of an orbit (origin allowed).
Grid orbit_indicator(const TorusGeometry& geom, const OrbitClass& orbit);

/// Eigenvalues of a block-circulant operator, indexed by frequency.
struct SpectrumGrid {
  Grid lam;
  int side() const { return lam.side(); }
  double operator()(int i, int j) const { return lam(i, j); }
};

/// mu[i,j] = sum_{k,l} theta[k,l] cos(2 pi (ik + jl) / p), the spectrum of C(theta).
SpectrumGrid spectrum_of_C(const ThetaField& theta);
/// Same transform applied to an arbitrary s-symmetric grid.
SpectrumGrid spectrum_of_grid(const Grid& g);
/// 1 - mu: spectrum of I - C(theta).
SpectrumGrid precision_spectrum(const ThetaField& theta);

/// p^2 x p^2 matrix with B[i1 p + j1, i2 p + j2] = g[i2 - i1, j2 - j1].
Eigen::MatrixXd dense_block_circulant(const Grid& g, int limit = kDenseLimit);
Eigen::MatrixXd dense_C(const ThetaField& theta, int limit = kDenseLimit);

/// Inverse of dense_C. With `strip_identity` the input is read as I - C(theta).
/// Throws PreconditionError when B is not symmetric block circulant or when the
/// implied theta[0,0] is nonzero.
ThetaField theta_of_dense(const Eigen::MatrixXd& B, bool strip_identity = false, double tol = 1e-12);

/// Frobenius residual of
///   C(Psi_a) C(Psi_b) (1 + s_a)(1 + s_b) = (1 + s_{a+b}) C(Psi_{a+b}) + (1 + s_{a-b}) C(Psi_{a-b})
/// for anisotropic elements, where s_x = 1 iff x = -x mod p and Psi_0 is the
/// origin indicator. When neither factor is self-symmetric the left factor is 1.
double product_identity_check(const BasisElement& a, const BasisElement& b, int limit = kDenseLimit);

std::pair<double, double> phi_extremes(const SpectrumGrid& spec);

/// JSON {"p": p, "entries": [[i, j, value], ...]}; one entry per s-orbit suffices.
ThetaField theta_from_json(std::string_view text);
std::string theta_to_json(const ThetaField& theta);

}  // namespace gmrf
