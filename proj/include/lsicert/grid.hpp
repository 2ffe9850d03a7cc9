#pragma once

#include "lsicert/common.hpp"

#include <optional>
#include <string>

namespace lsicert {

class SmoothedMeasure;

/// Uniform tensor grid on the centered box [-L, L]^dimension, dimension 1 or 2.
/// Node (i, j) has flat index i + n * j.
class GridDomain {
 public:
  GridDomain(int dimension, double half_width, int nodes_per_axis);
  GridDomain() : GridDomain(1, 1.0, 16) {}

  /// L = R + 6 delta, n = 2001 in 1D and 201 per axis in 2D unless given.
  static GridDomain default_for(const SmoothedMeasure& sm,
                                std::optional<int> nodes_per_axis = std::nullopt);

  int dimension() const noexcept { return dim_; }
  double half_width() const noexcept { return half_width_; }
  int nodes_per_axis() const noexcept { return n_; }
  double spacing() const noexcept { return h_; }
  Eigen::Index size() const noexcept { return dim_ == 1 ? n_ : Eigen::Index(n_) * n_; }

  double coord(int i) const noexcept { return -half_width_ + i * h_; }
  Vector node(Eigen::Index k) const;
  /// All nodes as columns (dimension x size).
  Matrix nodes() const;

  /// Whether the box contains B(0, R + 6 delta).
  bool covers(const SmoothedMeasure& sm) const;
  std::string sizing_hint(const SmoothedMeasure& sm) const;

  /// Same node count on [-L/s, L/s].
  GridDomain scaled(double s) const;

 private:
  int dim_;
  double half_width_;
  int n_;
  double h_;
};

}  // namespace lsicert
