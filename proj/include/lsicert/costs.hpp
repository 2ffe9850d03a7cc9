#pragma once

#include "lsicert/common.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace lsicert {

// omega(u) = sign(u) (|u| + u^2/2): odd, strictly increasing.
inline double omega(double u) noexcept {
  const double a = std::abs(u);
  return std::copysign(a + 0.5 * a * a, u);
}

inline double omega_inverse(double v) noexcept {
  const double a = std::abs(v);
  // sqrt(1 + 2a) - 1 written without cancellation.
  return std::copysign(2.0 * a / (std::sqrt(1.0 + 2.0 * a) + 1.0), v);
}

// alpha(u) = min(u^2, |u|).
inline double alpha(double u) noexcept {
  const double a = std::abs(u);
  return std::min(a * a, a);
}

inline Vector T_map(Eigen::Ref<const Vector> x) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = omega(x[i]);
  return out;
}

inline double l4_norm_pow4(Eigen::Ref<const Vector> z) noexcept {
  return z.array().square().square().sum();
}

enum class CostKind { quadratic, l4sq, paper_k, tilde_k };

std::string to_string(CostKind k);
CostKind parse_cost_kind(const std::string& s);

/// Transport cost selector. `D` is used (and required) only by tilde_k.
struct CostSpec {
  CostKind kind = CostKind::quadratic;
  std::optional<double> D;

  static CostSpec quadratic() { return {CostKind::quadratic, std::nullopt}; }
  static CostSpec l4sq() { return {CostKind::l4sq, std::nullopt}; }
  static CostSpec paper_k() { return {CostKind::paper_k, std::nullopt}; }
  static CostSpec tilde_k(double D) { return {CostKind::tilde_k, D}; }

  void validate() const {
    require((kind == CostKind::tilde_k) == D.has_value(), "cost parameter D is required iff kind = tilde_k");
    if (D) require(*D > 0.0, "cost parameter D must be positive");
  }
};

/// k(x, y) = min(|z|^2, |z|) + min(|z|_4^4, |z|_4^2), z = x - y.
inline double paper_k_cost(Eigen::Ref<const Vector> z) noexcept {
  const double e2 = z.squaredNorm();
  const double e = std::sqrt(e2);
  const double q4 = l4_norm_pow4(z);
  const double q2 = std::sqrt(q4);
  return std::min(e2, e) + std::min(q4, q2);
}

inline double cost_eval_unchecked(const CostSpec& spec, Eigen::Ref<const Vector> x,
                                  Eigen::Ref<const Vector> y) {
  switch (spec.kind) {
    case CostKind::quadratic: return (x - y).squaredNorm();
    case CostKind::l4sq: return std::sqrt(l4_norm_pow4(x - y));
    case CostKind::paper_k: return paper_k_cost(x - y);
    case CostKind::tilde_k: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double t = omega(x[i]) - omega(y[i]);
        s += t * t;
      }
      return alpha(std::sqrt(s) / *spec.D);
    }
  }
  return 0.0;
}

inline double cost_eval(const CostSpec& spec, Eigen::Ref<const Vector> x,
                        Eigen::Ref<const Vector> y) {
  spec.validate();
  require(x.size() == y.size(), "cost arguments must have the same dimension");
  return cost_eval_unchecked(spec, x, y);
}

}  // namespace lsicert
