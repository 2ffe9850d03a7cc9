#pragma once

#include "lsicert/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lsicert {

/// Finitely supported probability measure with atoms in the closed ball
/// B_d(0, R). Atoms are stored column-wise (d x N).
class BallMeasure {
 public:
  /// Weights must sum to 1 within 1e-12. The radius defaults to the largest
  /// atom norm; an override may only raise it.
  BallMeasure(Matrix atoms, Vector weights, std::optional<double> radius = std::nullopt);

  static BallMeasure point_mass(int dimension);
  /// Uniform weights 1/N over the given atoms.
  static BallMeasure uniform(Matrix atoms, std::optional<double> radius = std::nullopt);

  int dimension() const noexcept { return static_cast<int>(atoms_.rows()); }
  int size() const noexcept { return static_cast<int>(atoms_.cols()); }
  double radius() const noexcept { return radius_; }
  double support_radius() const noexcept { return support_radius_; }

  const Matrix& atoms() const noexcept { return atoms_; }
  auto atom(int i) const { return atoms_.col(i); }
  const Vector& weights() const noexcept { return weights_; }
  const Vector& log_weights() const noexcept { return log_weights_; }

  bool is_uniform() const;
  bool is_symmetric(double tol = 1e-12) const;

  BallMeasure with_radius(double radius) const;

 private:
  Matrix atoms_;
  Vector weights_;
  Vector log_weights_;
  double support_radius_ = 0.0;
  double radius_ = 0.0;
};

/// Mean and covariance of the tilted discrete measure with weights
/// proportional to w_i exp(z.x_i / delta^2 - |x_i|^2 / (2 delta^2)).
struct TiltedMoments {
  Vector mean;
  Matrix covariance;
};

/// mu * gamma_delta for a BallMeasure mu. Immutable; every evaluation is a
/// pure function of the argument.
class SmoothedMeasure {
 public:
  SmoothedMeasure(BallMeasure base, double delta);

  const BallMeasure& base() const noexcept { return base_; }
  double delta() const noexcept { return delta_; }
  int dimension() const noexcept { return base_.dimension(); }
  double radius() const noexcept { return base_.radius(); }

  double log_density(Eigen::Ref<const Vector> z) const;
  double density(Eigen::Ref<const Vector> z) const;
  /// V = -log p.
  double potential(Eigen::Ref<const Vector> z) const;
  /// W_delta(z) = -log sum_i w_i exp(z.x_i/delta^2 - |x_i|^2/(2 delta^2)).
  double w_delta(Eigen::Ref<const Vector> z) const;
  Vector grad_w_delta(Eigen::Ref<const Vector> z) const;
  Vector grad_potential(Eigen::Ref<const Vector> z) const;
  Matrix hessian_potential(Eigen::Ref<const Vector> z) const;
  TiltedMoments tilted_moments(Eigen::Ref<const Vector> z) const;

  /// Normalized tilt weights (posterior atom probabilities given S = z).
  Vector tilt_weights(Eigen::Ref<const Vector> z) const;

 private:
  void check_dim(Eigen::Ref<const Vector> z) const;

  BallMeasure base_;
  double delta_;
  double log_norm_;  // -(d/2) log(2 pi delta^2)
};

/// n i.i.d. draws of S = X + delta Z as columns of a d x n matrix.
/// Output is a deterministic function of (sm, n, seed), independent of the
/// number of threads.
Matrix sample(const SmoothedMeasure& sm, std::size_t n, std::uint64_t seed);

/// Atoms and delta divided by s; the density becomes s^d p(s z).
SmoothedMeasure rescale(const SmoothedMeasure& sm, double s);

/// log(sum exp(v)), -inf for an empty or all -inf input.
double log_sum_exp(Eigen::Ref<const Vector> v);

// Plain-text measure files: header "d N delta", then N rows "w x_1 ... x_d".
SmoothedMeasure read_measure(std::istream& in);
SmoothedMeasure read_measure_file(const std::string& path);
void write_measure(std::ostream& out, const SmoothedMeasure& sm);
void write_measure_file(const std::string& path, const SmoothedMeasure& sm);
/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

}  // namespace lsicert
