#pragma once

#include <array>
#include <compare>
#include <span>
#include <vector>

namespace gmrf {

struct LatticePoint {
  int i = 0;
  int j = 0;
  auto operator<=>(const LatticePoint&) const = default;
};

/// Square p x p torus with wraparound arithmetic.
class TorusGeometry {
 public:
  explicit TorusGeometry(int side);

  int side() const { return side_; }
  int node_count() const { return side_ * side_; }

  int wrap(int k) const { return ((k % side_) + side_) % side_; }
  LatticePoint normalize(LatticePoint x) const { return {wrap(x.i), wrap(x.j)}; }
  LatticePoint add(LatticePoint a, LatticePoint b) const { return normalize({a.i + b.i, a.j + b.j}); }
  LatticePoint sub(LatticePoint a, LatticePoint b) const { return normalize({a.i - b.i, a.j - b.j}); }

  /// Central symmetry s: (i, j) -> (-i, -j).
  LatticePoint reflect(LatticePoint x) const { return normalize({-x.i, -x.j}); }
  /// (2i, 2j) == (0, 0) mod p.
  bool self_symmetric(LatticePoint x) const { return reflect(x) == normalize(x); }

  /// Images of x under the order-8 dihedral group of the square lattice,
  /// generated by the quarter turn (i, j) -> (j, -i) and the flip (i, j) -> (-i, j).
  std::array<LatticePoint, 8> dihedral_images(LatticePoint x) const;

  /// Per-coordinate wrapped offset min(|d|, p - |d|).
  int wrapped_offset(int d) const;
  int squared_distance(LatticePoint a, LatticePoint b) const;
  double distance(LatticePoint a, LatticePoint b) const;

  std::size_t linear_index(LatticePoint x) const;

  bool operator==(const TorusGeometry&) const = default;

 private:
  int side_;
};

enum class Symmetry { central, dihedral };

struct OrbitClass {
  LatticePoint representative;       // smallest member in (i, j) order
  std::vector<LatticePoint> members;  // sorted
  std::size_t size() const { return members.size(); }
};

/// Partition of a symmetry-closed point set into orbits, ordered by representative.
/// Throws PreconditionError if the set is not closed under the group.
std::vector<OrbitClass> orbit_decomposition(const TorusGeometry& geom,
                                            std::span<const LatticePoint> points, Symmetry group);

/// Disc model { x != 0 : |x|^2 <= radius_sq } on the torus.
struct NeighborhoodModel {
  int index = 0;  // 1-based position in its collection (m_1, m_2, ...)
  int radius_sq = 0;
  std::vector<LatticePoint> points;  // sorted
  std::vector<OrbitClass> orbits_s;
  std::vector<OrbitClass> orbits_g;

  double radius() const;
  int dim() const { return static_cast<int>(orbits_s.size()); }
  int dim_iso() const { return static_cast<int>(orbits_g.size()); }
  int dim(bool isotropic) const { return isotropic ? dim_iso() : dim(); }
  const std::vector<OrbitClass>& orbits(bool isotropic) const { return isotropic ? orbits_g : orbits_s; }
  bool contains(LatticePoint x) const;
};

NeighborhoodModel make_disc_model(const TorusGeometry& geom, int radius_sq, int index = 0);

struct ModelCollection {
  TorusGeometry geometry;
  std::vector<NeighborhoodModel> models;

  const NeighborhoodModel& by_index(int index) const;  // 1-based
  std::size_t size() const { return models.size(); }
};

/// Nested disc models m_1 < m_2 < ..., one per attained squared distance, ending
/// with the model that covers every non-origin node.
ModelCollection build_model_collection(const TorusGeometry& geom);

/// N(m) = { a + b : a, b in m + {0} }, sorted and deduplicated.
std::vector<LatticePoint> sum_set(const TorusGeometry& geom, const NeighborhoodModel& m);

/// Number of s-orbits of N(m): the upper surrogate for d_{m^2}.
int dim_dm2_upper(const TorusGeometry& geom, const NeighborhoodModel& m);

struct GrowthStep {
  int index = 0;  // i, comparing m_{i+1} against m_i
  int dim = 0;
  int next_dim = 0;
  double ratio = 0.0;
  bool exceeds_two = false;
};

struct GrowthReport {
  std::vector<GrowthStep> steps;
  double max_ratio = 1.0;
  bool any_exceeds = false;
};

GrowthReport verify_growth(const ModelCollection& coll);

/// 4 (1 + sqrt2 / (2 r))^2 [1 + (1/d)(1 + (4/pi)(1 + sqrt(1 + pi (1 + d) / 2)))].
double dm2_ratio_bound(double radius, int dim);

struct Dm2Row {
  int index = 0;
  double radius = 0.0;
  int dim = 0;
  int dm2_upper = 0;
  double ratio = 0.0;
  double analytic_bound = 0.0;
  bool disc_fits = false;            // 2 r + 1 <= p
  double half_disc_lhs = 0.0;        // d + 2 + 2 floor(r)
  double half_disc_rhs = 0.0;        // pi r^2 / 2
  bool exceeds = false;              // ratio > analytic bound
};

struct Dm2Report {
  std::vector<Dm2Row> rows;
  bool any_exceeds = false;
};

Dm2Report verify_dm2_ratio(const ModelCollection& coll);

}  // namespace gmrf
