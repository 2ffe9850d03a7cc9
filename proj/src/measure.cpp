#include "lsicert/measure.hpp"

#include "lsicert/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace lsicert {

double log_sum_exp(Eigen::Ref<const Vector> v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

BallMeasure::BallMeasure(Matrix atoms, Vector weights, std::optional<double> radius)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  require(atoms_.rows() >= 1, "measure dimension must be positive");
  require(atoms_.cols() >= 1, "measure needs at least one atom");
  require(weights_.size() == atoms_.cols(), "one weight per atom required");
  require(atoms_.allFinite() && weights_.allFinite(), "non-finite atom or weight");
  require((weights_.array() >= 0.0).all(), "weights must be nonnegative");
  const double total = weights_.sum();
  require(std::abs(total - 1.0) <= 1e-12,
          "weights must sum to 1 (got " + format_double(total) + ")");

  log_weights_ = weights_.array().log();
  support_radius_ = 0.0;
  for (Eigen::Index i = 0; i < atoms_.cols(); ++i) {
    if (weights_[i] > 0.0) support_radius_ = std::max(support_radius_, atoms_.col(i).norm());
  }
  radius_ = support_radius_;
  if (radius) {
    require(*radius >= support_radius_ * (1.0 - 1e-15),
            "radius override must not be below the largest atom norm");
    radius_ = std::max(*radius, support_radius_);
  }
}

BallMeasure BallMeasure::point_mass(int dimension) {
  require(dimension >= 1, "dimension must be positive");
  return BallMeasure(Matrix::Zero(dimension, 1), Vector::Ones(1));
}

BallMeasure BallMeasure::uniform(Matrix atoms, std::optional<double> radius) {
  const auto n = atoms.cols();
  require(n >= 1, "measure needs at least one atom");
  return BallMeasure(std::move(atoms), Vector::Constant(n, 1.0 / static_cast<double>(n)), radius);
}

bool BallMeasure::is_uniform() const {
  const double u = 1.0 / static_cast<double>(size());
  return ((weights_.array() - u).abs() <= 1e-12).all();
}

bool BallMeasure::is_symmetric(double tol) const {
  // Every atom x must have a partner at -x carrying the same weight.
  for (int i = 0; i < size(); ++i) {
    bool found = false;
    for (int j = 0; j < size() && !found; ++j) {
      found = (atoms_.col(i) + atoms_.col(j)).norm() <= tol &&
              std::abs(weights_[i] - weights_[j]) <= tol;
    }
    if (!found) return false;
  }
  return true;
}

BallMeasure BallMeasure::with_radius(double radius) const {
  return BallMeasure(atoms_, weights_, radius);
}

SmoothedMeasure::SmoothedMeasure(BallMeasure base, double delta)
    : base_(std::move(base)), delta_(delta) {
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  log_norm_ = -0.5 * base_.dimension() * std::log(2.0 * std::numbers::pi * delta * delta);
}

void SmoothedMeasure::check_dim(Eigen::Ref<const Vector> z) const {
  if (z.size() != dimension()) {
    throw InputError("point has dimension " + std::to_string(z.size()) + ", measure has " +
                     std::to_string(dimension()));
  }
}

double SmoothedMeasure::log_density(Eigen::Ref<const Vector> z) const {
  check_dim(z);
  const double inv2 = 0.5 / (delta_ * delta_);
  const auto& x = base_.atoms();
  Vector terms(base_.size());
  for (int i = 0; i < base_.size(); ++i) {
    terms[i] = base_.log_weights()[i] - (z - x.col(i)).squaredNorm() * inv2;
  }
  return log_norm_ + log_sum_exp(terms);
}

double SmoothedMeasure::density(Eigen::Ref<const Vector> z) const {
  return std::exp(log_density(z));
}

double SmoothedMeasure::potential(Eigen::Ref<const Vector> z) const { return -log_density(z); }

double SmoothedMeasure::w_delta(Eigen::Ref<const Vector> z) const {
  check_dim(z);
  const double d2 = delta_ * delta_;
  const auto& x = base_.atoms();
  Vector terms(base_.size());
  for (int i = 0; i < base_.size(); ++i) {
    terms[i] = base_.log_weights()[i] + (z.dot(x.col(i)) - 0.5 * x.col(i).squaredNorm()) / d2;
  }
  return -log_sum_exp(terms);
}

Vector SmoothedMeasure::tilt_weights(Eigen::Ref<const Vector> z) const {
  check_dim(z);
  const double inv2 = 0.5 / (delta_ * delta_);
  const auto& x = base_.atoms();
  Vector t(base_.size());
  for (int i = 0; i < base_.size(); ++i) {
    t[i] = base_.log_weights()[i] - (z - x.col(i)).squaredNorm() * inv2;
  }
  const double m = t.maxCoeff();
  Vector w = (t.array() - m).exp();
  return w / w.sum();
}

TiltedMoments SmoothedMeasure::tilted_moments(Eigen::Ref<const Vector> z) const {
  const Vector pi = tilt_weights(z);
  const auto& x = base_.atoms();
  TiltedMoments tm;
  tm.mean = x * pi;
  const Matrix centered = x.colwise() - tm.mean;
  tm.covariance = centered * pi.asDiagonal() * centered.transpose();
  tm.covariance = 0.5 * (tm.covariance + tm.covariance.transpose());
  return tm;
}

Vector SmoothedMeasure::grad_w_delta(Eigen::Ref<const Vector> z) const {
  const Vector pi = tilt_weights(z);
  return -(base_.atoms() * pi) / (delta_ * delta_);
}

Vector SmoothedMeasure::grad_potential(Eigen::Ref<const Vector> z) const {
  return z / (delta_ * delta_) + grad_w_delta(z);
}

Matrix SmoothedMeasure::hessian_potential(Eigen::Ref<const Vector> z) const {
  const TiltedMoments tm = tilted_moments(z);
  const double d2 = delta_ * delta_;
  const int d = dimension();
  return Matrix::Identity(d, d) / d2 - tm.covariance / (d2 * d2);
}

Matrix sample(const SmoothedMeasure& sm, std::size_t n, std::uint64_t seed) {
  require(n >= 1, "sample count must be at least 1");
  return kernels::sample(sm, n, seed);
}

SmoothedMeasure rescale(const SmoothedMeasure& sm, double s) {
  require(std::isfinite(s) && s > 0.0, "rescale factor must be positive");
  const BallMeasure& b = sm.base();
  const bool overridden = b.radius() > b.support_radius();
  BallMeasure scaled(b.atoms() / s, b.weights(),
                     overridden ? std::optional<double>(b.radius() / s) : std::nullopt);
  return SmoothedMeasure(std::move(scaled), sm.delta() / s);
}

}  // namespace lsicert
