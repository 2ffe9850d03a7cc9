#include "lsicert/decompositions.hpp"

#include "lsicert/quadrature.hpp"
#include "lsicert/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

namespace lsicert {

RegularizedField::RegularizedField(ScalarField W, double sigma, int d, const RegularizeSpec& spec)
    : W_(std::move(W)), sigma_(sigma), d_(d) {
  require(static_cast<bool>(W_), "function handle is empty");
  require(sigma > 0.0 && std::isfinite(sigma), "sigma must be positive");
  require(d >= 1, "dimension must be positive");
  using M = RegularizeSpec::Method;
  M method = spec.method;
  if (method == M::automatic) method = d <= 2 ? M::gauss_hermite : M::monte_carlo;
  if (method == M::adaptive) {
    require(d == 1, "adaptive regularization is one-dimensional");
    adaptive_ = true;
    return;
  }
  if (method == M::gauss_hermite) {
    require(d <= 2, "Gauss-Hermite regularization supports d <= 2");
    const int base = spec.order > 0 ? spec.order : (d == 1 ? 256 : 64);
    require(base >= 2, "quadrature order must be at least 2");
    // An explicit request gets one rule; the automatic choice doubles the
    // order (twice in 1D, once in 2D) and then, in 1D, falls back to
    // adaptive quadrature.
    const int attempts = spec.method != M::automatic ? 1 : (d == 1 ? 3 : 2);
    double diff = 0.0;
    int order = base;
    for (int a = 0; a < attempts; ++a, order *= 2) {
      const CubatureRule rule = gaussian_cubature(d, order, sigma);
      const CubatureRule coarse = gaussian_cubature(d, order / 2 + 1, sigma);
      diff = 0.0;
      for (int p = -1; p <= 1; ++p) {
        const Vector x = Vector::Constant(d, p * sigma);
        const double fine = kernels::serial::gaussian_smooth(W_, rule.offsets, rule.weights, x)[0];
        const double rough = kernels::serial::gaussian_smooth(W_, coarse.offsets, coarse.weights, x)[0];
        diff = std::max(diff, std::abs(fine - rough));
      }
      if (diff <= spec.tolerance) {
        offsets_ = std::make_shared<const Matrix>(rule.offsets);
        weights_ = std::make_shared<const Vector>(rule.weights);
        return;
      }
    }
    if (spec.method == M::automatic && d == 1) {
      adaptive_ = true;
      return;
    }
    throw SolverError("Gauss-Hermite order " + std::to_string(order / 2) + " too small for tolerance " +
                          format_double(spec.tolerance),
                      diff);
  }
  require(spec.samples >= 1, "sample count must be positive");
  Rng rng = make_rng(spec.seed, 0);
  std::normal_distribution<double> normal;
  Matrix off(d, static_cast<Eigen::Index>(spec.samples));
  for (Eigen::Index s = 0; s < off.cols(); ++s)
    for (int k = 0; k < d; ++k) off(k, s) = sigma * normal(rng);
  offsets_ = std::make_shared<const Matrix>(std::move(off));
  weights_ = std::make_shared<const Vector>(Vector::Constant(static_cast<Eigen::Index>(spec.samples),
                                                            1.0 / static_cast<double>(spec.samples)));
}

double RegularizedField::operator()(const Vector& x) const {
  require(x.size() == d_, "point has the wrong dimension");
  if (adaptive_) {
    using boost::math::quadrature::gauss_kronrod;
    const double c = 1.0 / std::sqrt(2.0 * M_PI);
    auto f = [&](double z) {
      Vector y(1);
      y[0] = x[0] + sigma_ * z;
      return W_(y) * c * std::exp(-0.5 * z * z);
    };
    double err = 0.0;
    return gauss_kronrod<double, 31>::integrate(f, -40.0, 40.0, 30, 1e-12, &err);
  }
  Matrix p(d_, 1);
  p.col(0) = x;
  return kernels::serial::gaussian_smooth(W_, *offsets_, *weights_, p)[0];
}

Vector RegularizedField::evaluate(const Matrix& points) const {
  require(points.rows() == d_, "points have the wrong dimension");
  if (adaptive_) {
    Vector out(points.cols());
    for (Eigen::Index k = 0; k < points.cols(); ++k) out[k] = (*this)(points.col(k));
    return out;
  }
  return kernels::gaussian_smooth(W_, *offsets_, *weights_, points);
}

RegularizedField miclo_regularize(ScalarField W, double sigma, int d, const RegularizeSpec& spec) {
  return RegularizedField(std::move(W), sigma, d, spec);
}

BoundReport holley_stroock_assemble(double rho_eff, double osc) {
  require(osc >= 0.0 && std::isfinite(osc), "oscillation bound must be finite and nonnegative");
  BoundReport r;
  r.name = "holley_stroock";
  r.kind = InequalityKind::log_sobolev;
  r.source = "bakry-emery+holley-stroock";
  if (!(rho_eff > 0.0)) {
    r.valid = false;
    r.reason = "effective convexity must be positive";
    return r;
  }
  r.valid = true;
  r.value = 2.0 / rho_eff * std::exp(osc);
  r.reason = "applicable";
  return r;
}

MicloDecomposition miclo_decompose(const SmoothedMeasure& sm, std::optional<double> sigma,
                                   const RegularizeSpec& spec) {
  const int d = sm.dimension();
  const double delta = sm.delta();
  const double d2 = delta * delta;
  MicloDecomposition dec;
  dec.dimension = d;
  dec.delta = delta;
  dec.rho = 1.0 / d2;
  dec.lipschitz_l = sm.radius() / d2;
  const double a1 = gaussian_norm_mean(1), ad = gaussian_norm_mean(d);
  if (sigma) {
    require(*sigma > 0.0, "sigma must be positive");
    dec.sigma = *sigma;
  } else {
    dec.sigma = dec.lipschitz_l > 0.0 ? 2.0 * dec.lipschitz_l * a1 / dec.rho : delta;
  }
  dec.rho_effective = dec.rho - dec.lipschitz_l * a1 / dec.sigma;
  dec.bound_sup_Ub = dec.lipschitz_l * dec.sigma * ad;
  dec.hessian_bound = dec.lipschitz_l * a1 / dec.sigma;
  dec.assembled = holley_stroock_assemble(dec.rho_effective, 2.0 * dec.bound_sup_Ub);

  auto shared = std::make_shared<const SmoothedMeasure>(sm);
  dec.W_c = [d2](const Vector& z) { return z.squaredNorm() / (2.0 * d2); };
  dec.W_l = [shared](const Vector& z) { return shared->w_delta(z); };
  dec.W = [shared, d2](const Vector& z) { return z.squaredNorm() / (2.0 * d2) + shared->w_delta(z); };
  dec.U_sigma = miclo_regularize(dec.W_l, dec.sigma, d, spec);
  const RegularizedField U = dec.U_sigma;
  dec.U_c = [U, d2](const Vector& z) { return z.squaredNorm() / (2.0 * d2) + U(z); };
  dec.U_b = [U, shared](const Vector& z) { return shared->w_delta(z) - U(z); };
  return dec;
}

ConvexityReport miclo_convexity_check(const MicloDecomposition& dec, const GridDomain& grid,
                                      double tolerance) {
  const int d = dec.dimension;
  require(d <= 2 && grid.dimension() == d, "convexity check needs a grid of the decomposition's dimension");
  std::vector<Vector> dirs;
  for (int a = 0; a < d; ++a) dirs.push_back(Vector::Unit(d, a));
  if (d == 2) {
    dirs.push_back((Vector(2) << 1.0, 1.0).finished() / std::sqrt(2.0));
    dirs.push_back((Vector(2) << 1.0, -1.0).finished() / std::sqrt(2.0));
  }
  const double h = 1e-3 * dec.sigma;
  const int n = grid.nodes_per_axis();
  std::vector<Eigen::Index> interior;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const int i = static_cast<int>(k % n);
    const int j = d == 2 ? static_cast<int>(k / n) : 1;
    if (i > 0 && i < n - 1 && j > 0 && j < n - 1) interior.push_back(k);
  }
  // Probe cloud: every node, then +h v and -h v for each interior node and direction.
  const auto nn = static_cast<Eigen::Index>(grid.size());
  const auto ni = static_cast<Eigen::Index>(interior.size());
  const auto nd = static_cast<Eigen::Index>(dirs.size());
  Matrix pts(d, nn + 2 * ni * nd);
  pts.leftCols(nn) = grid.nodes();
  Eigen::Index col = nn;
  for (Eigen::Index k : interior) {
    const Vector x = grid.node(k);
    for (const Vector& v : dirs) {
      pts.col(col++) = x + h * v;
      pts.col(col++) = x - h * v;
    }
  }
  const Vector u = dec.U_sigma.evaluate(pts);

  ConvexityReport rep;
  rep.hessian_bound = dec.hessian_bound;
  rep.rho_effective = dec.rho_effective;
  rep.sup_bound = dec.bound_sup_Ub;
  rep.min_uc_second_derivative = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < nn; ++k) {
    rep.numeric_sup_Ub = std::max(rep.numeric_sup_Ub, std::abs(dec.W_l(pts.col(k)) - u[k]));
  }
  col = nn;
  for (Eigen::Index idx = 0; idx < ni; ++idx) {
    const double u0 = u[interior[static_cast<std::size_t>(idx)]];
    for (Eigen::Index v = 0; v < nd; ++v) {
      const double up = u[col++], um = u[col++];
      const double second = (up - 2.0 * u0 + um) / (h * h);
      rep.max_abs_second_derivative = std::max(rep.max_abs_second_derivative, std::abs(second));
      rep.min_uc_second_derivative = std::min(rep.min_uc_second_derivative, second + dec.rho);
    }
  }
  rep.nodes = interior.size();
  rep.margin = rep.hessian_bound - rep.max_abs_second_derivative;
  rep.uc_margin = rep.min_uc_second_derivative - rep.rho_effective;
  rep.sup_margin = rep.sup_bound - rep.numeric_sup_Ub;
  rep.passed = rep.margin >= -tolerance && rep.uc_margin >= -tolerance && rep.sup_margin >= -tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

RadialDensity::RadialDensity(RadialProfile profile, int d, double delta)
    : profile_(std::move(profile)), d_(d), delta_(delta) {
  require(d != 1, "use the one-dimensional measure for d = 1");
  require(d == 2 || d == 3, "radial reduction supports d = 2 or 3");
  require(delta > 0.0 && std::isfinite(delta), "delta must be positive");
  require(profile_.radii.size() == profile_.weights.size() && profile_.radii.size() > 0,
          "profile needs one weight per radius");
  require((profile_.radii.array() >= 0.0).all(), "radii must be nonnegative");
  require((profile_.weights.array() >= 0.0).all(), "weights must be nonnegative");
  require(std::abs(profile_.weights.sum() - 1.0) <= 1e-12, "profile weights must sum to 1");
  radius_ = profile_.radii.maxCoeff();
}

namespace {

// log of the average of exp(kappa * x_1) over the unit sphere.
double log_sphere_average(double kappa, int d) {
  const double k = std::abs(kappa);
  if (k == 0.0) return 0.0;
  if (d == 3) {
    // (1/2) int_{-1}^{1} e^{k u} du = sinh(k) / k.
    return k + std::log1p(-std::exp(-2.0 * k)) - std::log(2.0 * k);
  }
  // Uniform angle rule: exact for trigonometric polynomials of degree < M.
  const int M = 64 + 4 * static_cast<int>(std::ceil(k));
  Vector v(M);
  for (int m = 0; m < M; ++m) v[m] = k * std::cos(2.0 * M_PI * m / M);
  return log_sum_exp(v) - std::log(static_cast<double>(M));
}

}  // namespace

double RadialDensity::log_profile_density(double s) const {
  const double d2 = delta_ * delta_;
  Vector terms(profile_.radii.size());
  for (Eigen::Index j = 0; j < terms.size(); ++j) {
    const double r = profile_.radii[j];
    terms[j] = std::log(profile_.weights[j]) - r * r / (2.0 * d2) + log_sphere_average(s * r / d2, d_);
  }
  return -0.5 * d_ * std::log(2.0 * M_PI * d2) - s * s / (2.0 * d2) + log_sum_exp(terms);
}

double RadialDensity::profile_density(double s) const { return std::exp(log_profile_density(s)); }

double RadialDensity::density(const Vector& z) const {
  require(z.size() == d_, "point has the wrong dimension");
  return profile_density(z.norm());
}

BoundReport RadialDensity::lsi_bound() const { return bound_lsi_dim1(delta_, radius_); }

RadialDensity radial_reduce(const RadialProfile& profile, int d, double delta) {
  return RadialDensity(profile, d, delta);
}

RadialConvexityReport radial_convexity_check(const std::function<double(double)>& w, double rho, int d,
                                             const GridDomain& grid, double tolerance) {
  require(static_cast<bool>(w), "function handle is empty");
  require(d >= 2, "radial convexity is checked for d >= 2");
  require(grid.dimension() == 2, "radial convexity is checked on a 2D grid");
  const double L = grid.half_width();
  for (int k = 0; k <= 200; ++k) {
    const double r = 1.5 * L * k / 200.0;
    if (std::abs(w(r) - w(-r)) > 1e-9) throw InputError("w is not even");
  }
  const double h = 1e-4 * std::max(1.0, L);
  auto W = [&](double x, double y) { return w(std::hypot(x, y)); };
  RadialConvexityReport rep;
  rep.rho = rho;
  rep.dimension = d;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Vector z = grid.node(k);
    const double x = z[0], y = z[1], w0 = W(x, y);
    Matrix H(2, 2);
    H(0, 0) = (W(x + h, y) - 2.0 * w0 + W(x - h, y)) / (h * h);
    H(1, 1) = (W(x, y + h) - 2.0 * w0 + W(x, y - h)) / (h * h);
    H(0, 1) = H(1, 0) = (W(x + h, y + h) - W(x + h, y - h) - W(x - h, y + h) + W(x - h, y - h)) / (4.0 * h * h);
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, es.eigenvalues()[0]);
    ++rep.nodes;
  }
  rep.margin = rep.min_eigenvalue - rho;
  rep.passed = rep.margin >= -tolerance * std::max(1.0, std::abs(rho));
  return rep;
}

}  // namespace lsicert
