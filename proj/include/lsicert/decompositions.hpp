#pragma once

#include "lsicert/bounds.hpp"
#include "lsicert/common.hpp"
#include "lsicert/grid.hpp"
#include "lsicert/kernels.hpp"
#include "lsicert/measure.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

namespace lsicert {

using ScalarField = kernels::ScalarField;

struct RegularizeSpec {
  enum class Method { automatic, gauss_hermite, adaptive, monte_carlo };
  Method method = Method::automatic;  // Gauss-Hermite (order raised as needed) for d <= 2, Monte Carlo above
  int order = 0;                      // Gauss-Hermite points per axis; 0 = 256 in 1D, 64 in 2D
  std::size_t samples = 20000;        // Monte Carlo draws
  std::uint64_t seed = 0;
  /// Gauss-Hermite only: the rule is compared with a half-order rule at a few
  /// probe points and rejected if they differ by more than this.
  double tolerance = 1e-6;
};

/// U_sigma(x) = E W(x + sigma Z). Gauss-Hermite and Monte Carlo use a fixed
/// node set, so U_sigma is a smooth function of x; `adaptive` is 1D
/// Gauss-Kronrod for integrands with kinks.
class RegularizedField {
 public:
  RegularizedField() = default;
  RegularizedField(ScalarField W, double sigma, int d, const RegularizeSpec& spec);

  double operator()(const Vector& x) const;
  /// Evaluates at every column of `points`, in parallel.
  Vector evaluate(const Matrix& points) const;

  double sigma() const noexcept { return sigma_; }
  int dimension() const noexcept { return d_; }

 private:
  ScalarField W_;
  double sigma_ = 0.0;
  int d_ = 0;
  bool adaptive_ = false;
  std::shared_ptr<const Matrix> offsets_;
  std::shared_ptr<const Vector> weights_;
};

RegularizedField miclo_regularize(ScalarField W, double sigma, int d, const RegularizeSpec& spec = {});

/// W = W_c + W_l with W_c = |z|^2/(2 delta^2) (rho = 1/delta^2 convex) and
/// W_l = W_delta (l = R/delta^2 Lipschitz); U_c = W_c + U_sigma, U_b = W_l - U_sigma.
struct MicloDecomposition {
  int dimension = 0;
  double delta = 0.0;
  double sigma = 0.0;
  double rho = 0.0;
  double rho_effective = 0.0;   // rho - l a_1 / sigma
  double lipschitz_l = 0.0;
  double bound_sup_Ub = 0.0;    // l sigma a_d
  double hessian_bound = 0.0;   // l a_1 / sigma
  BoundReport assembled;        // holley_stroock_assemble(rho_eff, 2 l sigma a_d)
  ScalarField W, W_c, W_l, U_c, U_b;
  RegularizedField U_sigma;
};

/// Default sigma = 2 l a_1 / rho (which gives rho_eff = rho / 2); for R = 0
/// the Lipschitz part vanishes and sigma defaults to delta.
MicloDecomposition miclo_decompose(const SmoothedMeasure& sm, std::optional<double> sigma = std::nullopt,
                                   const RegularizeSpec& spec = {});

struct ConvexityReport {
  double max_abs_second_derivative = 0.0;  // of U_sigma over nodes and directions
  double hessian_bound = 0.0;
  double margin = 0.0;                     // bound - max
  double min_uc_second_derivative = 0.0;   // of U_c
  double rho_effective = 0.0;
  double uc_margin = 0.0;                  // min - rho_eff
  double numeric_sup_Ub = 0.0;
  double sup_bound = 0.0;
  double sup_margin = 0.0;                 // l sigma a_d - numeric sup
  std::size_t nodes = 0;
  bool passed = false;
};

/// Second differences at step 1e-3 sigma along axis and diagonal directions at
/// interior nodes, plus the sup of |U_b| over all nodes.
ConvexityReport miclo_convexity_check(const MicloDecomposition& dec, const GridDomain& grid,
                                      double tolerance = 1e-4);

/// (2 / rho_eff) exp(osc) for a potential perturbation of oscillation at most
/// `osc` (for U_b, osc = 2 sup|U_b|).
BoundReport holley_stroock_assemble(double rho_eff, double osc);

/// Radially symmetric mu as a mixture of uniform measures on spheres of radii r_j.
struct RadialProfile {
  Vector radii;
  Vector weights;
};

/// p_hat_delta with p(z) = p_hat_delta(|z|) for mu * gamma_delta in d = 2 or 3.
class RadialDensity {
 public:
  RadialDensity(RadialProfile profile, int d, double delta);

  double log_profile_density(double s) const;
  /// p_hat_delta(s); even in s.
  double profile_density(double s) const;
  double density(const Vector& z) const;

  int dimension() const noexcept { return d_; }
  double delta() const noexcept { return delta_; }
  double radius() const noexcept { return radius_; }
  const RadialProfile& profile() const noexcept { return profile_; }
  /// 4 delta^2 exp(8 R^2 / (pi delta^2)), valid for radial measures in any d.
  BoundReport lsi_bound() const;

 private:
  RadialProfile profile_;
  int d_;
  double delta_;
  double radius_ = 0.0;
};

RadialDensity radial_reduce(const RadialProfile& profile, int d, double delta);

struct RadialConvexityReport {
  double min_eigenvalue = 0.0;
  double rho = 0.0;
  double margin = 0.0;
  std::size_t nodes = 0;
  int dimension = 2;
  bool passed = false;
};

/// Checks that W(z) = w(|z|) is rho-convex on a 2D grid (the Hessian of a
/// radial function has the same eigenvalues w''(r), w'(r)/r in every d >= 2).
RadialConvexityReport radial_convexity_check(const std::function<double(double)>& w, double rho,
                                             int d, const GridDomain& grid, double tolerance = 1e-5);

}  // namespace lsicert
