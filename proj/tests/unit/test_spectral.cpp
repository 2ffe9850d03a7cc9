#include "lsicert/bounds.hpp"
#include "lsicert/spectral.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace lsicert;
using doctest::Approx;

namespace {

SmoothedMeasure gaussian(int d, double delta) { return SmoothedMeasure(BallMeasure::point_mass(d), delta); }

SmoothedMeasure two_atom(double R, double delta, double w0 = 0.5) {
  Matrix X(1, 2);
  X << R, -R;
  Vector w(2);
  w << w0, 1 - w0;
  return SmoothedMeasure(BallMeasure(X, w), delta);
}

Vector vec1(double x) { return Vector::Constant(1, x); }

// Dense generalized eigenproblem L v = lambda M v for the 1D midpoint scheme,
// assembled directly from the density.
double dense_poincare_1d(const SmoothedMeasure& sm, const GridDomain& g) {
  const int n = g.nodes_per_axis();
  const double h = g.spacing();
  Vector p(n);
  for (int k = 0; k < n; ++k) p[k] = sm.density(vec1(g.coord(k)));
  const double total = p.sum();
  Matrix L = Matrix::Zero(n, n), M = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) M(k, k) = p[k] / total;
  for (int k = 0; k + 1 < n; ++k) {
    const double w = sm.density(vec1(g.coord(k) + 0.5 * h)) / (total * h * h);
    L(k, k) += w;
    L(k + 1, k + 1) += w;
    L(k, k + 1) -= w;
    L(k + 1, k) -= w;
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(L, M, Eigen::EigenvaluesOnly);
  return 1.0 / es.eigenvalues()[1];
}

// Trapezoid rule over a uniform 1D grid.
template <class F>
double trapezoid(F f, double a, double b, int n) {
  const double h = (b - a) / (n - 1);
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n - 1; ++i) s += f(a + i * h);
  return s * h;
}

}  // namespace

TEST_CASE("poincare estimate on gaussians") {
  for (double delta : {0.5, 1.0, 2.0}) {
    const auto r = estimate_poincare(gaussian(1, delta), GridDomain(1, 8 * delta, 2001));
    CHECK(r.constant_estimate == Approx(delta * delta).epsilon(0.01));
    CHECK(r.constant_estimate == Approx(1 / r.eigenvalue).epsilon(1e-15));
    CHECK(r.residual < 1e-6);
    CHECK(r.maximizer.size() == 2001);
  }
  const auto r2 = estimate_poincare(gaussian(2, 1.0), GridDomain(2, 7.0, 121));
  CHECK(r2.constant_estimate == Approx(1.0).epsilon(0.01));
}

TEST_CASE("poincare estimate against a dense eigensolver") {
  for (double delta : {0.5, 0.8}) {
    const auto sm = two_atom(1.0, delta, 0.35);
    const GridDomain g(1, 1.0 + 6 * delta, 241);
    const double oracle = dense_poincare_1d(sm, g);
    const auto r = estimate_poincare(sm, g);
    CHECK(r.constant_estimate == Approx(oracle).epsilon(1e-6));
  }
  const auto sm = two_atom(1.0, 0.5);
  const auto r = estimate_poincare(sm, GridDomain::default_for(sm));
  CHECK(r.constant_estimate <= *bound_poincare(0.5, 1.0).value);
  CHECK(r.constant_estimate >= 0.25);
}

TEST_CASE("poincare estimate scales with the measure") {
  const auto sm = two_atom(0.7, 0.6, 0.3);
  const GridDomain g(1, 0.7 + 6 * 0.6, 801);
  const double s = 3.0;
  const double base = estimate_poincare(sm, g).constant_estimate;
  const double scaled = estimate_poincare(rescale(sm, s), g.scaled(s)).constant_estimate;
  CHECK(scaled * s * s == Approx(base).epsilon(1e-6));
}

TEST_CASE("poincare estimate refuses small grids") {
  CHECK_THROWS_AS(estimate_poincare(gaussian(1, 1.0), GridDomain(1, 3.0, 101)), InputError);
  CHECK_THROWS_AS(estimate_poincare(gaussian(3, 1.0), GridDomain(2, 8.0, 31)), InputError);
}

TEST_CASE("exponential family on gaussians") {
  for (double delta : {0.3, 1.0, 2.5}) {
    const auto g = gaussian(1, delta);
    for (double th : {-3.0, 0.01, 0.7, 5.0}) CHECK(expfamily_ratio(g, vec1(th)) == Approx(2 * delta * delta).epsilon(1e-12));
    CHECK(std::abs(estimate_lsi_expfamily(g).estimate - 2 * delta * delta) <= 1e-9);
  }
  const auto g3 = gaussian(3, 0.8);
  CHECK(std::abs(estimate_lsi_expfamily(g3).estimate - 2 * 0.64) <= 1e-9);
  CHECK_THROWS_AS(expfamily_ratio(gaussian(1, 1), vec1(0.0)), InputError);
  // theta = 0 members are skipped.
  const auto r = estimate_lsi_expfamily(gaussian(1, 1), {vec1(0.0), vec1(1.0)});
  CHECK(r.estimate == Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_lsi_expfamily(gaussian(1, 1), {vec1(0.0)}), InputError);
}

TEST_CASE("exponential family against quadrature") {
  const auto sm = two_atom(0.9, 0.6, 0.3);
  for (double th : {-2.0, 0.4, 3.0}) {
    const double L = 0.9 + 14 * 0.6;
    const int n = 20001;
    const auto p = [&](double x) { return sm.density(vec1(x)); };
    const double z = trapezoid([&](double x) { return std::exp(th * x) * p(x); }, -L, L, n);
    const double e = trapezoid([&](double x) { return th * x * std::exp(th * x) * p(x); }, -L, L, n);
    const double energy = 0.25 * th * th * z;
    const double oracle = (e - z * std::log(z)) / energy;
    CHECK(expfamily_ratio(sm, vec1(th)) == Approx(oracle).epsilon(1e-8));
    CHECK(expfamily_ratio_grid(sm, vec1(th), GridDomain(1, L, 4001)) == Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("exponential family on two points stays below 2 delta^2 + 2 R^2") {
  const double R = 1.0;
  double prev = 0.0;
  for (double delta : {1.0, 0.6, 0.4, 0.25}) {
    const double est = estimate_lsi_expfamily(two_atom(R, delta)).estimate;
    CHECK(est <= 2 * delta * delta + 2 * R * R + 1e-9);
    CHECK(est / (delta * delta) > prev);
    prev = est / (delta * delta);
  }
}

TEST_CASE("grid log-Sobolev ascent") {
  const auto g = gaussian(1, 1.0);
  const auto r = estimate_lsi_grid(g, GridDomain::default_for(g), 200, 1);
  CHECK(r.estimate >= 1.95);
  CHECK(r.estimate <= 2.0 * 1.01);

  const auto sm = two_atom(1.0, 0.7, 0.4);
  const GridDomain grid = GridDomain::default_for(sm);
  const auto gl = estimate_lsi_grid(sm, grid, 100, 2);
  const double ef = estimate_lsi_expfamily(sm).estimate;
  CHECK(gl.estimate >= ef * (1 - 1e-3));
  const double cp = estimate_poincare(sm, grid).constant_estimate;
  CHECK(gl.estimate >= 2 * cp * 0.95);
  CHECK(gl.estimate <= *best_bound(0.7, 1.0, 1).value * 1.02);
  CHECK(gl.maximizer.size() == grid.size());

  const auto again = estimate_lsi_grid(sm, grid, 100, 2);
  CHECK(again.estimate == gl.estimate);
}

TEST_CASE("chi-square between gaussians") {
  const Vector x = vec1(0.3);
  CHECK(chi2_gaussians(x, x, 1.0) == 0.0);
  CHECK(chi2_gaussians(vec1(0.0), vec1(1.3), 1.3) == Approx(std::numbers::e - 1).epsilon(1e-14));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 6; ++t) {
    const double delta = 0.5 + u(rng) * 0.3;
    const double x0 = u(rng), y0 = x0 + 3 * delta * u(rng);
    // int (g_y / g_x - 1)^2 g_x
    const auto gauss = [delta](double s, double m) {
      return std::exp(-(s - m) * (s - m) / (2 * delta * delta)) / (delta * std::sqrt(2 * std::numbers::pi));
    };
    const double c = 2 * y0 - x0;
    const double I = trapezoid([&](double s) { return gauss(s, y0) * gauss(s, y0) / gauss(s, x0); },
                               c - 12 * delta, c + 12 * delta, 6001);
    CHECK(chi2_gaussians(vec1(x0), vec1(y0), delta) == Approx(I - 1).epsilon(1e-6));
  }
}

TEST_CASE("variance and entropy decompositions") {
  const auto sm = two_atom(0.8, 0.6, 0.3);
  const GridDomain grid = GridDomain::default_for(sm, 1201);
  const Vector one = Vector::Ones(grid.size());
  const auto vc = variance_decomposition(sm, one, grid);
  CHECK(std::abs(vc.inner) < 1e-14);
  CHECK(std::abs(vc.outer) < 1e-14);
  CHECK(std::abs(vc.total) < 1e-14);
  const auto ec = entropy_decomposition(sm, one, grid);
  CHECK(std::abs(ec.total) < 1e-14);

  Vector f(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double x = grid.coord(static_cast<int>(k));
    f[k] = std::abs(x - 0.2) + 0.5 * std::max(0.0, x + 0.7) + 0.1;  // piecewise linear, positive
  }
  const auto v = variance_decomposition(sm, f, grid);
  CHECK(std::abs(v.inner + v.outer - v.total) <= 1e-8);
  CHECK(v.residual <= 1e-8);
  CHECK(v.outer > 0);
  const auto e = entropy_decomposition(sm, f, grid);
  CHECK(std::abs(e.inner + e.outer - e.total) <= 1e-8);
  CHECK(e.inner >= 0);
  CHECK(e.outer >= 0);

  const auto g = gaussian(1, 0.7);
  const GridDomain gg = GridDomain::default_for(g, 801);
  Vector f1(gg.size());
  for (Eigen::Index k = 0; k < gg.size(); ++k) f1[k] = 1 + std::sin(gg.coord(static_cast<int>(k)));
  CHECK(variance_decomposition(g, f1, gg).outer == 0.0);
  CHECK(entropy_decomposition(g, f1, gg).outer == 0.0);

  const auto narrow = variance_decomposition(sm, Vector::Ones(101), GridDomain(1, 1.0, 101));
  CHECK(narrow.tail_warning);
}

TEST_CASE("muckenhoupt product and constant") {
  CHECK(muckenhoupt_product(0.0) == 0.0);
  // y * Mills ratio, using int_0^y (1 + u^2) e^{u^2/2} du = y e^{y^2/2}.
  for (double y : {0.1, 0.5, 1.0, 2.0, 5.0, 12.0}) {
    const double closed = y * std::exp(0.5 * y * y) * std::sqrt(std::numbers::pi / 2) * std::erfc(y / std::sqrt(2.0));
    CHECK(muckenhoupt_product(y) == Approx(closed).epsilon(1e-10));
  }
  // Simpson with Richardson extrapolation on the raw integrals at y = 1.5.
  const double y = 1.5;
  const auto simpson = [](auto f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
    return s * h / 3;
  };
  const auto head = [](double u) { return (1 + u * u) * std::exp(0.5 * u * u); };
  const auto tail = [](double u) { return std::exp(-0.5 * u * u); };
  const auto rich = [&](auto f, double a, double b) {
    const double s1 = simpson(f, a, b, 2000), s2 = simpson(f, a, b, 4000);
    return s2 + (s2 - s1) / 15;
  };
  const double oracle = rich(tail, y, 40.0) * rich(head, 0.0, y);
  CHECK(muckenhoupt_product(y) == Approx(oracle).epsilon(1e-10));

  double prev = 0.0;
  for (double t = 0.25; t < 200; t *= 1.7) {
    const double v = muckenhoupt_product(t);
    CHECK(v > prev);
    CHECK(v < 1.0);
    prev = v;
  }
  const auto c = muckenhoupt_constant();
  CHECK(c.value > 0);
  CHECK(std::isfinite(c.value));
  CHECK(std::abs(c.value - 1.0) <= 1e-6);
  CHECK(c.error_estimate <= 1e-6);
  CHECK(std::abs(muckenhoupt_constant(1e-8).value - c.value) <= 1e-6);
}

TEST_CASE("weighted poincare") {
  const auto g = gaussian(1, 1.0);
  const GridDomain grid = GridDomain::default_for(g, 2001);
  const GridForm form = build_grid_form(g, grid);
  const auto lin = linear_test_function(vec1(1.0));
  const double r = weighted_poincare_ratio(form, lin);
  // Var(Z) / E[(1 + Z^2)^{-1}].
  const double e = trapezoid([](double u) { return std::exp(-0.5 * u * u) / (1 + u * u); }, -12, 12, 20001) /
                   std::sqrt(2 * std::numbers::pi);
  CHECK(r == Approx(1 / e).epsilon(1e-4));
  const double c = muckenhoupt_constant().value;
  CHECK(r <= 2 * 4 * c);

  TestFunction shifted = lin;
  shifted.value = [](const Vector& u) { return u[0] + 5.0; };
  CHECK(weighted_poincare_ratio(form, shifted) == Approx(r).epsilon(1e-10));

  const auto sm = two_atom(1.0, 1.0);
  const auto rep = weighted_poincare_check(sm, GridDomain::default_for(sm), 5, 3);
  CHECK(rep.passed);
  REQUIRE(rep.ratios.size() == 5);
  CHECK(rep.ratios[0] <= rep.bound);
  CHECK(rep.ratios[1] <= rep.bound);
  CHECK(rep.bound == Approx(2 * rep.hardy_constant * 2 * std::exp(4.0)).epsilon(1e-12));
}

TEST_CASE("lyapunov check") {
  const double s = 0.125, delta = 1.0;
  const auto g = gaussian(1, delta);
  const GridDomain grid(1, 6.0, 2401);
  // LW/W = 2 s d - (2 s / delta^2 - 4 s^2) |x|^2 for the Gaussian potential.
  const double b = 2 * s, c = 2 * s / (delta * delta) - 4 * s * s;
  const auto rep = lyapunov_check(g, exp_quadratic(s), b, c, grid);
  CHECK(std::abs(rep.max_violation) < 1e-4);
  CHECK(rep.passed);
  CHECK_FALSE(lyapunov_check(g, exp_quadratic(s), b - 0.01, c, grid).passed);

  const auto g2 = gaussian(2, 0.8);
  const GridDomain grid2(2, 5.0, 161);
  const double s2 = 0.2, d2 = 0.64;
  const auto rep2 = lyapunov_check(g2, exp_quadratic(s2), 4 * s2 + 1e-3, 2 * s2 / d2 - 4 * s2 * s2, grid2);
  CHECK(rep2.passed);

  // W = 1 passes iff b >= c max |x|^2 over interior nodes.
  const double cmax = 0.5;
  const double inner = 6.0 - grid.spacing();
  CHECK(lyapunov_check(g, exp_quadratic(0.0), cmax * inner * inner * 1.001, cmax, grid).passed);
  CHECK_FALSE(lyapunov_check(g, exp_quadratic(0.0), cmax * inner * inner * 0.99, cmax, grid).passed);

  LyapunovFunction bad{"half", [](const Vector&) { return 0.5; }};
  CHECK_THROWS_AS(lyapunov_check(g, bad, 1, 1, grid), InputError);

  const auto search = lyapunov_search(two_atom(1.0, 1.0), 1.0, 1.0 / 64, GridDomain(1, 7.0, 701), {0.01, 0.05, 0.1});
  CHECK(search.scan.size() == 3);
}
