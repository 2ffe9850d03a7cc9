#include "lsicert/grid.hpp"

#include "lsicert/measure.hpp"

#include <cmath>

namespace lsicert {

GridDomain::GridDomain(int dimension, double half_width, int nodes_per_axis)
    : dim_(dimension), half_width_(half_width), n_(nodes_per_axis) {
  require(dimension == 1 || dimension == 2, "grids are 1D or 2D");
  require(std::isfinite(half_width) && half_width > 0.0, "grid half width must be positive");
  require(nodes_per_axis >= 16, "grids need at least 16 nodes per axis");
  h_ = 2.0 * half_width_ / (n_ - 1);
}

GridDomain GridDomain::default_for(const SmoothedMeasure& sm, std::optional<int> nodes_per_axis) {
  const int d = sm.dimension();
  require(d <= 2, "grid estimators support d <= 2");
  const int n = nodes_per_axis.value_or(d == 1 ? 2001 : 201);
  return GridDomain(d, sm.radius() + 6.0 * sm.delta(), n);
}

Vector GridDomain::node(Eigen::Index k) const {
  Vector x(dim_);
  if (dim_ == 1) {
    x[0] = coord(static_cast<int>(k));
  } else {
    x[0] = coord(static_cast<int>(k % n_));
    x[1] = coord(static_cast<int>(k / n_));
  }
  return x;
}

Matrix GridDomain::nodes() const {
  Matrix out(dim_, size());
  for (Eigen::Index k = 0; k < size(); ++k) out.col(k) = node(k);
  return out;
}

bool GridDomain::covers(const SmoothedMeasure& sm) const {
  return sm.dimension() == dim_ &&
         half_width_ >= (sm.radius() + 6.0 * sm.delta()) * (1.0 - 1e-12);
}

std::string GridDomain::sizing_hint(const SmoothedMeasure& sm) const {
  return "grid half width " + format_double(half_width_) + " must be at least R + 6 delta = " +
         format_double(sm.radius() + 6.0 * sm.delta());
}

GridDomain GridDomain::scaled(double s) const {
  require(s > 0.0, "scale must be positive");
  return GridDomain(dim_, half_width_ / s, n_);
}

}  // namespace lsicert
