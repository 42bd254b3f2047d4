#include "gmrf/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "gmrf/error.hpp"

namespace gmrf {

TorusGeometry::TorusGeometry(int side) : side_(side) {
  if (side < 2) throw PreconditionError("torus side must be at least 2, got " + std::to_string(side));
}

std::array<LatticePoint, 8> TorusGeometry::dihedral_images(LatticePoint x) const {
  const int i = x.i;
  const int j = x.j;
  return {normalize({i, j}),   normalize({j, -i}), normalize({-i, -j}), normalize({-j, i}),
          normalize({-i, j}),  normalize({j, i}),  normalize({i, -j}),  normalize({-j, -i})};
}

int TorusGeometry::wrapped_offset(int d) const {
  const int a = wrap(d);
  return std::min(a, side_ - a);
}

int TorusGeometry::squared_distance(LatticePoint a, LatticePoint b) const {
  const int di = wrapped_offset(a.i - b.i);
  const int dj = wrapped_offset(a.j - b.j);
  return di * di + dj * dj;
}

double TorusGeometry::distance(LatticePoint a, LatticePoint b) const {
  return std::sqrt(static_cast<double>(squared_distance(a, b)));
}

std::size_t TorusGeometry::linear_index(LatticePoint x) const {
  const LatticePoint y = normalize(x);
  return static_cast<std::size_t>(y.i) * side_ + y.j;
}

std::vector<OrbitClass> orbit_decomposition(const TorusGeometry& geom,
                                            std::span<const LatticePoint> points, Symmetry group) {
  std::vector<char> in_set(geom.node_count(), 0);
  for (const auto& x : points) in_set[geom.linear_index(x)] = 1;

  std::vector<char> seen(geom.node_count(), 0);
  std::vector<OrbitClass> orbits;
  std::vector<LatticePoint> sorted(points.begin(), points.end());
  for (auto& x : sorted) x = geom.normalize(x);
  std::sort(sorted.begin(), sorted.end());

  for (const auto& x : sorted) {
    if (seen[geom.linear_index(x)]) continue;
    std::vector<LatticePoint> members;
    if (group == Symmetry::central) {
      members = {x, geom.reflect(x)};
    } else {
      const auto images = geom.dihedral_images(x);
      members.assign(images.begin(), images.end());
    }
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (const auto& y : members) {
      if (!in_set[geom.linear_index(y)])
        throw PreconditionError("point set is not closed under the symmetry group");
      seen[geom.linear_index(y)] = 1;
    }
    orbits.push_back({members.front(), std::move(members)});
  }
  return orbits;
}

double NeighborhoodModel::radius() const { return std::sqrt(static_cast<double>(radius_sq)); }

bool NeighborhoodModel::contains(LatticePoint x) const {
  return std::binary_search(points.begin(), points.end(), x);
}

NeighborhoodModel make_disc_model(const TorusGeometry& geom, int radius_sq, int index) {
  NeighborhoodModel m;
  m.index = index;
  m.radius_sq = radius_sq;
  const int p = geom.side();
  const LatticePoint origin{0, 0};
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      const LatticePoint x{i, j};
      if (x == origin) continue;
      if (geom.squared_distance(x, origin) <= radius_sq) m.points.push_back(x);
    }
  m.orbits_s = orbit_decomposition(geom, m.points, Symmetry::central);
  m.orbits_g = orbit_decomposition(geom, m.points, Symmetry::dihedral);
  return m;
}

const NeighborhoodModel& ModelCollection::by_index(int index) const {
  if (index < 1 || index > static_cast<int>(models.size()))
    throw PreconditionError("model index " + std::to_string(index) + " outside 1.." +
                            std::to_string(models.size()));
  return models[static_cast<std::size_t>(index - 1)];
}

ModelCollection build_model_collection(const TorusGeometry& geom) {
  const int p = geom.side();
  std::set<int> radii;
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != 0 || j != 0) radii.insert(geom.squared_distance({i, j}, {0, 0}));

  ModelCollection coll{geom, {}};
  int index = 1;
  for (int r2 : radii) coll.models.push_back(make_disc_model(geom, r2, index++));
  return coll;
}

std::vector<LatticePoint> sum_set(const TorusGeometry& geom, const NeighborhoodModel& m) {
  std::vector<LatticePoint> base = m.points;
  base.push_back({0, 0});
  std::vector<char> hit(geom.node_count(), 0);
  for (const auto& a : base)
    for (const auto& b : base) hit[geom.linear_index(geom.add(a, b))] = 1;
  std::vector<LatticePoint> out;
  for (int i = 0; i < geom.side(); ++i)
    for (int j = 0; j < geom.side(); ++j)
      if (hit[geom.linear_index({i, j})]) out.push_back({i, j});
  return out;
}

namespace {

// s-orbit count of an s-closed membership mask.
int central_orbit_count(const TorusGeometry& geom, const std::vector<char>& mask) {
  int members = 0;
  int fixed = 0;
  for (int i = 0; i < geom.side(); ++i)
    for (int j = 0; j < geom.side(); ++j) {
      if (!mask[geom.linear_index({i, j})]) continue;
      ++members;
      if (geom.self_symmetric({i, j})) ++fixed;
    }
  return (members + fixed) / 2;
}

}  // namespace

int dim_dm2_upper(const TorusGeometry& geom, const NeighborhoodModel& m) {
  const auto n = sum_set(geom, m);
  return static_cast<int>(orbit_decomposition(geom, n, Symmetry::central).size());
}

GrowthReport verify_growth(const ModelCollection& coll) {
  GrowthReport report;
  for (std::size_t k = 0; k + 1 < coll.models.size(); ++k) {
    GrowthStep step;
    step.index = coll.models[k].index;
    step.dim = coll.models[k].dim();
    step.next_dim = coll.models[k + 1].dim();
    step.ratio = static_cast<double>(step.next_dim) / step.dim;
    step.exceeds_two = step.ratio > 2.0;
    report.max_ratio = std::max(report.max_ratio, step.ratio);
    report.any_exceeds = report.any_exceeds || step.exceeds_two;
    report.steps.push_back(step);
  }
  return report;
}

double dm2_ratio_bound(double radius, int dim) {
  using std::numbers::pi;
  const double d = dim;
  const double lead = 1.0 + std::sqrt(2.0) / (2.0 * radius);
  const double tail = 1.0 + (4.0 / pi) * (1.0 + std::sqrt(1.0 + pi * (1.0 + d) / 2.0));
  return 4.0 * lead * lead * (1.0 + tail / d);
}

Dm2Report verify_dm2_ratio(const ModelCollection& coll) {
  const auto& geom = coll.geometry;
  Dm2Report report;
  // N(m) grows with m; extend it incrementally with the points each model adds.
  std::vector<char> in_model(geom.node_count(), 0);
  std::vector<char> in_sum(geom.node_count(), 0);
  std::vector<LatticePoint> base{{0, 0}};
  in_model[geom.linear_index({0, 0})] = 1;
  in_sum[geom.linear_index({0, 0})] = 1;

  for (const auto& m : coll.models) {
    std::vector<LatticePoint> fresh;
    for (const auto& x : m.points)
      if (!in_model[geom.linear_index(x)]) fresh.push_back(x);
    for (const auto& x : fresh) {
      in_model[geom.linear_index(x)] = 1;
      base.push_back(x);
    }
    for (const auto& a : fresh)
      for (const auto& b : base) in_sum[geom.linear_index(geom.add(a, b))] = 1;

    Dm2Row row;
    row.index = m.index;
    row.radius = m.radius();
    row.dim = m.dim();
    row.dm2_upper = central_orbit_count(geom, in_sum);
    row.ratio = static_cast<double>(row.dm2_upper) / row.dim;
    row.analytic_bound = dm2_ratio_bound(row.radius, row.dim);
    row.disc_fits = 2.0 * row.radius + 1.0 <= geom.side();
    row.half_disc_lhs = row.dim + 2.0 + 2.0 * std::floor(row.radius);
    row.half_disc_rhs = std::numbers::pi * m.radius_sq / 2.0;
    row.exceeds = row.ratio > row.analytic_bound;
    report.any_exceeds = report.any_exceeds || row.exceeds;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace gmrf
