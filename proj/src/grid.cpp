#include "gmrf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gmrf/error.hpp"

namespace gmrf {

Grid::Grid(int side, double fill) : side_(side) {
  if (side < 1) throw PreconditionError("grid side must be positive");
  values_.assign(static_cast<std::size_t>(side) * side, fill);
}

double Grid::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

double Grid::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Grid::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Grid::asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < side_; ++i)
    for (int j = 0; j < side_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(-i, -j)));
  return worst;
}

Grid& Grid::operator+=(const Grid& other) {
  if (other.side_ != side_) throw PreconditionError("grid side mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Grid& Grid::operator-=(const Grid& other) {
  if (other.side_ != side_) throw PreconditionError("grid side mismatch");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Grid& Grid::operator*=(double scale) {
  for (double& v : values_) v *= scale;
  return *this;
}

}  // namespace gmrf
