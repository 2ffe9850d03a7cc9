#include "lsicert/decompositions.hpp"
#include "lsicert/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lsicert;
using doctest::Approx;

namespace {

SmoothedMeasure two_atom(double R, double delta) {
  Matrix X(1, 2);
  X << R, -R;
  return SmoothedMeasure(BallMeasure::uniform(X), delta);
}

SmoothedMeasure square(double R, double delta) {
  Matrix X(2, 4);
  X << R, -R, 0, 0, 0, 0, R, -R;
  return SmoothedMeasure(BallMeasure::uniform(X), delta);
}

Vector v1(double x) { return Vector::Constant(1, x); }

const double a1 = std::sqrt(2.0 / std::numbers::pi);

}  // namespace

TEST_CASE("regularization of simple functions") {
  const ScalarField lin = [](const Vector& x) { return 3.0 * x[0] - 1.0; };
  const auto U = miclo_regularize(lin, 0.7, 1);
  for (double x : {-4.0, 0.0, 2.5}) CHECK(U(v1(x)) == Approx(3 * x - 1).epsilon(1e-12));

  const ScalarField lin2 = [](const Vector& x) { return x[0] - 2.0 * x[1]; };
  const auto U2 = miclo_regularize(lin2, 1.3, 2);
  CHECK(U2((Vector(2) << 0.4, -1.0).finished()) == Approx(2.4).epsilon(1e-12));

  const ScalarField absx = [](const Vector& x) { return std::abs(x[0]); };
  RegularizeSpec adaptive;
  adaptive.method = RegularizeSpec::Method::adaptive;
  for (double sigma : {0.3, 1.0, 2.0}) {
    const auto A = miclo_regularize(absx, sigma, 1, adaptive);
    CHECK(A(v1(0.0)) == Approx(sigma * a1).epsilon(1e-10));
    // E|x + sigma Z| = x (1 - 2 Phi(-x/sigma)) + 2 sigma phi(x/sigma)
    const double x = 0.8;
    const double closed = x * std::erf(x / (sigma * std::sqrt(2.0))) +
                          2 * sigma * std::exp(-x * x / (2 * sigma * sigma)) / std::sqrt(2 * std::numbers::pi);
    CHECK(A(v1(x)) == Approx(closed).epsilon(1e-10));
  }

  RegularizeSpec mc;
  mc.method = RegularizeSpec::Method::monte_carlo;
  mc.samples = 200000;
  mc.seed = 3;
  const ScalarField norm3 = [](const Vector& x) { return x.norm(); };
  const auto M = miclo_regularize(norm3, 1.0, 3, mc);
  // E|Z| in 3D is 2 sqrt(2/pi).
  CHECK(M(Vector::Zero(3)) == Approx(2 * a1).epsilon(0.01));
  CHECK(M(Vector::Zero(3)) == miclo_regularize(norm3, 1.0, 3, mc)(Vector::Zero(3)));

  CHECK_THROWS_AS(miclo_regularize(lin, 0.0, 1), InputError);
  CHECK_THROWS_AS(miclo_regularize(ScalarField{}, 1.0, 1), InputError);
}

TEST_CASE("miclo decomposition defaults") {
  const auto sm = two_atom(1.0, 0.5);
  const auto dec = miclo_decompose(sm);
  const double rho = 4.0, l = 4.0;
  CHECK(dec.rho == Approx(rho));
  CHECK(dec.lipschitz_l == Approx(l));
  CHECK(dec.sigma == Approx(2 * l * a1 / rho));
  CHECK(dec.rho_effective == Approx(rho / 2));
  CHECK(dec.bound_sup_Ub == Approx(l * dec.sigma * a1));
  REQUIRE(dec.assembled.valid);
  CHECK(*dec.assembled.value == Approx(2 / dec.rho_effective * std::exp(2 * dec.bound_sup_Ub)));

  for (double x : {-3.0, -0.4, 0.0, 1.7}) {
    const Vector z = v1(x);
    CHECK(dec.U_c(z) + dec.U_b(z) == Approx(dec.W(z)).epsilon(1e-12));
    CHECK(dec.W_c(z) + dec.W_l(z) == Approx(dec.W(z)).epsilon(1e-12));
    CHECK(std::abs(dec.U_b(z)) <= dec.bound_sup_Ub);
  }
  // W is -log p up to a constant.
  const Vector a = v1(0.3), b = v1(-1.2);
  CHECK(dec.W(a) - dec.W(b) == Approx(-sm.log_density(a) + sm.log_density(b)).epsilon(1e-12));

  const auto g = miclo_decompose(SmoothedMeasure(BallMeasure::point_mass(1), 0.8));
  CHECK(g.sigma == 0.8);
  CHECK(g.bound_sup_Ub == 0.0);
  CHECK(*g.assembled.value == Approx(2 * 0.64));

  const auto s2 = miclo_decompose(square(0.5, 1.0), 0.9);
  CHECK(s2.sigma == 0.9);
  CHECK(s2.bound_sup_Ub == Approx(0.5 * 0.9 * std::sqrt(std::numbers::pi / 2)));
}

TEST_CASE("miclo convexity check") {
  const auto sm = two_atom(1.0, 0.6);
  const auto dec = miclo_decompose(sm);
  const auto rep = miclo_convexity_check(dec, GridDomain(1, 4.0, 401));
  CHECK(rep.passed);
  CHECK(rep.margin >= -1e-4);
  CHECK(rep.uc_margin >= -1e-4);
  CHECK(rep.sup_margin >= 0);
  CHECK(rep.nodes == 399);

  const auto rep2 = miclo_convexity_check(miclo_decompose(square(0.6, 0.7)), GridDomain(2, 3.0, 41));
  CHECK(rep2.passed);

  // A smaller sigma makes rho_eff negative.
  const auto tight = miclo_decompose(sm, 0.05);
  CHECK(tight.rho_effective < 0);
  CHECK_FALSE(tight.assembled.valid);

  // |x| regularized at the origin has second derivative a_1 / sigma.
  const double sigma = 0.5;
  RegularizeSpec adaptive;
  adaptive.method = RegularizeSpec::Method::adaptive;
  const auto A = miclo_regularize([](const Vector& x) { return std::abs(x[0]); }, sigma, 1, adaptive);
  const auto closed = [sigma](double x) {
    return x * std::erf(x / (sigma * std::sqrt(2.0))) +
           2 * sigma * std::exp(-x * x / (2 * sigma * sigma)) / std::sqrt(2 * std::numbers::pi);
  };
  const double h = 0.05;
  const double second = (A(v1(h)) - 2 * A(v1(0)) + A(v1(-h))) / (h * h);
  const double exact = (closed(h) - 2 * closed(0) + closed(-h)) / (h * h);
  CHECK(second == Approx(exact).epsilon(1e-6));
  CHECK(exact == Approx(a1 / sigma).epsilon(0.01));
}

TEST_CASE("holley-stroock assembly") {
  CHECK(*holley_stroock_assemble(1.0, 0.0).value == Approx(2.0));
  CHECK(*holley_stroock_assemble(2.0, std::log(3.0)).value == Approx(3.0));
  CHECK_FALSE(holley_stroock_assemble(0.0, 1.0).valid);
  CHECK_FALSE(holley_stroock_assemble(-1.0, 1.0).valid);
  CHECK_THROWS_AS(holley_stroock_assemble(1.0, -1.0), InputError);
}

TEST_CASE("radial reduction in two dimensions") {
  RadialProfile prof{(Vector(2) << 0.5, 1.5).finished(), (Vector(2) << 0.3, 0.7).finished()};
  const double delta = 0.8, d2 = delta * delta;
  const auto rd = radial_reduce(prof, 2, delta);
  CHECK(rd.radius() == 1.5);
  for (double s : {0.0, 0.4, 1.5, 3.0}) {
    double oracle = 0;
    for (int j = 0; j < 2; ++j) {
      const double r = prof.radii[j];
      oracle += prof.weights[j] * std::exp(-(s * s + r * r) / (2 * d2)) * std::cyl_bessel_i(0.0, s * r / d2);
    }
    oracle /= 2 * std::numbers::pi * d2;
    CHECK(rd.profile_density(s) == Approx(oracle).epsilon(1e-12));
    CHECK(rd.profile_density(-s) == rd.profile_density(s));
  }
  // Rotation invariance.
  const double th = 0.7;
  CHECK(rd.density((Vector(2) << std::cos(th), std::sin(th)).finished()) == Approx(rd.profile_density(1.0)).epsilon(1e-14));
  CHECK(*rd.lsi_bound().value == Approx(4 * d2 * std::exp(8 * 2.25 / (std::numbers::pi * d2))));
}

TEST_CASE("radial reduction in three dimensions") {
  RadialProfile prof{(Vector(3) << 0.0, 1.0, 2.0).finished(), (Vector(3) << 0.2, 0.5, 0.3).finished()};
  const double delta = 0.6, d2 = delta * delta;
  const auto rd = radial_reduce(prof, 3, delta);
  // Average the Gaussian over the sphere with u = cos(angle) uniform on [-1, 1].
  const auto rule = gauss_legendre(80);
  const double c = std::pow(2 * std::numbers::pi * d2, -1.5);
  for (double s : {0.0, 0.3, 1.0, 2.2}) {
    double oracle = 0;
    for (int j = 0; j < 3; ++j) {
      const double r = prof.radii[j];
      double avg = 0;
      for (Eigen::Index q = 0; q < rule.nodes.size(); ++q) {
        avg += 0.5 * rule.weights[q] * std::exp(-(s * s + r * r - 2 * s * r * rule.nodes[q]) / (2 * d2));
      }
      oracle += prof.weights[j] * c * avg;
    }
    CHECK(rd.profile_density(s) == Approx(oracle).epsilon(1e-10));
    CHECK(rd.profile_density(-s) == Approx(rd.profile_density(s)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(radial_reduce(prof, 1, delta), InputError);
  CHECK_THROWS_AS(radial_reduce(prof, 4, delta), InputError);
  RadialProfile bad{(Vector(1) << 1.0).finished(), (Vector(1) << 0.9).finished()};
  CHECK_THROWS_AS(radial_reduce(bad, 2, delta), InputError);
}

TEST_CASE("radial convexity check") {
  const GridDomain grid(2, 2.0, 41);
  const auto quad = radial_convexity_check([](double r) { return 0.5 * r * r; }, 1.0, 2, grid);
  CHECK(quad.passed);
  CHECK(quad.min_eigenvalue == Approx(1.0).epsilon(1e-5));

  // r^2/2 + 0.1 sqrt(1 + r^2) is convex with Hessian >= 1.
  const auto bump = radial_convexity_check([](double r) { return 0.5 * r * r + 0.1 * std::sqrt(1 + r * r); }, 1.0, 3, grid);
  CHECK(bump.passed);
  CHECK_FALSE(radial_convexity_check([](double r) { return 0.5 * r * r; }, 1.5, 2, grid).passed);

  CHECK_THROWS_AS(radial_convexity_check([](double r) { return 0.5 * r * r + 0.01 * r; }, 1.0, 2, grid), InputError);
}
