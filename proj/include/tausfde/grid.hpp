#ifndef TAUSFDE_GRID_HPP
#define TAUSFDE_GRID_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tausfde/errors.hpp"

namespace tausfde {

/// Tensor grid of interior unknowns, stored lexicographically with the first
/// dimension varying fastest (2D index of point (i,j) is j*M_x + i).
class GridShape {
public:
  GridShape() = default;

  explicit GridShape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    detail::require(!dims_.empty(), "GridShape: at least one dimension required");
    for (auto d : dims_) detail::require(d > 0, "GridShape: every dimension must be positive");
    size_ = std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  GridShape(std::initializer_list<std::size_t> dims) : GridShape(std::vector<std::size_t>(dims)) {}

  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return size_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Distance in memory between neighbours along `axis` (product of the faster dims).
  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t a = 0; a < axis; ++a) s *= dims_[a];
    return s;
  }

  /// Multi-index (0-based, first dim first) of a flat position.
  std::vector<std::size_t> unravel(std::size_t flat) const {
    std::vector<std::size_t> idx(dims_.size());
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      idx[a] = flat % dims_[a];
      flat /= dims_[a];
    }
    return idx;
  }

  std::size_t ravel(std::span<const std::size_t> idx) const {
    std::size_t flat = 0;
    for (std::size_t a = dims_.size(); a-- > 0;) flat = flat * dims_[a] + idx[a];
    return flat;
  }

  bool operator==(const GridShape& other) const { return dims_ == other.dims_; }

private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
};

/// Uniform interior grid on a box: x_{i,k} = lower_i + (k+1) h_i, h_i = (upper_i - lower_i)/(M_i + 1).
struct GridGeometry {
  GridShape shape;
  std::vector<double> lower;
  std::vector<double> upper;

  GridGeometry(GridShape s, std::vector<double> lo, std::vector<double> hi)
      : shape(std::move(s)), lower(std::move(lo)), upper(std::move(hi)) {
    detail::require(lower.size() == shape.rank() && upper.size() == shape.rank(),
                    "GridGeometry: bounds must match grid rank");
    for (std::size_t a = 0; a < shape.rank(); ++a) {
      detail::require(lower[a] < upper[a], "GridGeometry: need lower < upper on every axis");
    }
  }

  double spacing(std::size_t axis) const {
    return (upper[axis] - lower[axis]) / static_cast<double>(shape.dim(axis) + 1);
  }

  double coordinate(std::size_t axis, std::size_t k) const {
    return lower[axis] + static_cast<double>(k + 1) * spacing(axis);
  }

  /// Coordinates of the interior point at flat index `flat`.
  void point(std::size_t flat, std::span<double> x) const {
    for (std::size_t a = 0; a < shape.rank(); ++a) {
      const std::size_t k = flat % shape.dim(a);
      flat /= shape.dim(a);
      x[a] = coordinate(a, k);
    }
  }

  /// Samples `field` at every interior point in grid order.
  template <class Field>
  std::vector<double> sample(Field&& field) const {
    std::vector<double> out(shape.size());
    std::vector<double> x(shape.rank());
    for (std::size_t p = 0; p < out.size(); ++p) {
      point(p, x);
      out[p] = field(std::span<const double>(x));
    }
    return out;
  }
};

}  // namespace tausfde

#endif  // TAUSFDE_GRID_HPP
