#pragma once

#include <span>
#include <vector>

namespace gmrf {

/// Dense p x p array of reals addressed by torus coordinates.
///
/// Storage is row-major: entry (i, j) lives at `i * p + j`. The call operator
/// reduces both coordinates modulo p, so negative lags such as (-1, 0) are
/// valid indices.
class Grid {
 public:
  Grid() = default;
  explicit Grid(int side, double fill = 0.0);

  int side() const { return side_; }
  std::size_t size() const { return values_.size(); }

  double operator()(int i, int j) const { return values_[offset(i, j)]; }
  double& operator()(int i, int j) { return values_[offset(i, j)]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double sum() const;
  double min() const;
  double max() const;
  double mean() const { return sum() / static_cast<double>(size()); }

  /// Largest |g(i,j) - g(-i,-j)|.
  double asymmetry() const;

  Grid& operator+=(const Grid& other);
  Grid& operator-=(const Grid& other);
  Grid& operator*=(double scale);

  friend Grid operator+(Grid a, const Grid& b) { return a += b; }
  friend Grid operator-(Grid a, const Grid& b) { return a -= b; }
  friend Grid operator*(Grid a, double s) { return a *= s; }
  friend Grid operator*(double s, Grid a) { return a *= s; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t offset(int i, int j) const {
    const int a = ((i % side_) + side_) % side_;
    const int b = ((j % side_) + side_) % side_;
    return static_cast<std::size_t>(a) * side_ + b;
  }

  int side_ = 0;
  std::vector<double> values_;
};

}  // namespace gmrf
