#include "lsicert/measure.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace lsicert;

namespace {

SmoothedMeasure random_measure(int d, int n, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Matrix X(d, n);
  Vector w(n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < d; ++i) X(i, j) = g(rng);
    w[j] = u(rng);
  }
  w /= w.sum();
  return SmoothedMeasure(BallMeasure(X, w), delta);
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Direct sum of Gaussian kernels; no log-domain tricks.
double naive_density(const SmoothedMeasure& sm, const Vector& z) {
  const int d = sm.dimension();
  const double s2 = sm.delta() * sm.delta();
  double p = 0.0;
  for (int i = 0; i < sm.base().size(); ++i) {
    p += sm.base().weights()[i] * std::exp(-(z - sm.base().atom(i)).squaredNorm() / (2 * s2));
  }
  return p / std::pow(2 * std::numbers::pi * s2, d / 2.0);
}

}  // namespace

TEST_CASE("ball measure invariants") {
  Matrix X(1, 2);
  X << -1, 1;
  CHECK_THROWS_AS(BallMeasure(X, vec({0.5, 0.6})), InputError);
  CHECK_THROWS_AS(BallMeasure(X, vec({1.2, -0.2})), InputError);
  CHECK_THROWS_AS(BallMeasure(X, vec({0.5, 0.5}), 0.5), InputError);
  const BallMeasure m(X, vec({0.5, 0.5}), 2.0);
  CHECK(m.radius() == 2.0);
  CHECK(m.support_radius() == 1.0);
  CHECK(BallMeasure(X, vec({0.5, 0.5})).radius() == 1.0);
  CHECK(m.is_symmetric());
  CHECK_THROWS_AS(SmoothedMeasure(m, 0.0), InputError);
}

TEST_CASE("density reference values") {
  const SmoothedMeasure g(BallMeasure::point_mass(1), 1.0);
  CHECK(g.density(vec({0.0})) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  Matrix X(1, 2);
  X << -1, 1;
  const SmoothedMeasure two(BallMeasure::uniform(X), 1.0);
  CHECK(two.density(vec({0.0})) == doctest::Approx(std::exp(-0.5) / std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
  CHECK_THROWS_AS(two.density(vec({0.0, 1.0})), InputError);

  const auto sm = random_measure(3, 6, 0.7, 1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    const Vector z = vec({n(rng), n(rng), n(rng)});
    CHECK(sm.density(z) == doctest::Approx(naive_density(sm, z)).epsilon(1e-12));
  }
}

TEST_CASE("density is finite far from the atoms") {
  const SmoothedMeasure g(BallMeasure::point_mass(1), 0.01);
  const double lp = g.log_density(vec({100.0}));
  CHECK(std::isfinite(lp));
  CHECK(lp == doctest::Approx(-0.5 * 1e8 - std::log(0.01 * std::sqrt(2 * std::numbers::pi))));
}

TEST_CASE("symmetric measures have even densities") {
  Matrix X(2, 4);
  X << 1, -1, 0.3, -0.3, 0.2, -0.2, -0.7, 0.7;
  const SmoothedMeasure sm(BallMeasure(X, vec({0.3, 0.3, 0.2, 0.2})), 0.8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int t = 0; t < 100; ++t) {
    const Vector z = vec({2 * n(rng), 2 * n(rng)});
    CHECK(sm.density(z) == doctest::Approx(sm.density(-z)).epsilon(1e-13));
  }
}

TEST_CASE("gradient of the potential") {
  const SmoothedMeasure g(BallMeasure::point_mass(2), 0.5);
  const Vector z = vec({0.3, -1.2});
  CHECK((g.grad_potential(z) - z / 0.25).norm() < 1e-14);

  Matrix X(1, 2);
  X << -0.8, 0.8;
  CHECK(SmoothedMeasure(BallMeasure::uniform(X), 0.6).grad_potential(vec({0.0})).norm() < 1e-15);

  const auto sm = random_measure(2, 5, 0.9, 4);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  const double h = 1e-4 * sm.delta();
  for (int t = 0; t < 30; ++t) {
    const Vector z = vec({n(rng), n(rng)});
    const Vector gr = sm.grad_potential(z);
    Vector fd(2);
    for (int i = 0; i < 2; ++i) {
      Vector zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      fd[i] = (sm.potential(zp) - sm.potential(zm)) / (2 * h);
    }
    CHECK((fd - gr).norm() <= 1e-6 * std::max(1.0, gr.norm()));
    // Lipschitz bound on W_delta.
    const double R = sm.radius(), d2 = sm.delta() * sm.delta();
    CHECK((gr - z / d2).norm() <= R / d2 + 1e-9);
  }
}

TEST_CASE("hessian of the potential") {
  const SmoothedMeasure g(BallMeasure::point_mass(3), 2.0);
  CHECK((g.hessian_potential(vec({1, 2, 3})) - Matrix::Identity(3, 3) / 4.0).norm() < 1e-15);

  const double R = 0.7, delta = 0.5;
  Matrix X(1, 2);
  X << -R, R;
  const SmoothedMeasure two(BallMeasure::uniform(X), delta);
  // Tilted variance at the symmetry point is R^2.
  const double expected = 1 / (delta * delta) - R * R / std::pow(delta, 4);
  CHECK(two.hessian_potential(vec({0.0}))(0, 0) == doctest::Approx(expected).epsilon(1e-13));

  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto sm = random_measure(2, 4, 0.6 + 0.2 * s, 10 + s);
    std::mt19937_64 rng(20 + s);
    std::normal_distribution<double> n;
    const double h = 1e-4 * sm.delta();
    const double d2 = sm.delta() * sm.delta(), R2 = sm.radius() * sm.radius();
    for (int t = 0; t < 20; ++t) {
      const Vector z = vec({2 * n(rng), 2 * n(rng)});
      const Matrix H = sm.hessian_potential(z);
      Matrix fd(2, 2);
      for (int i = 0; i < 2; ++i) {
        Vector zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        fd.col(i) = (sm.grad_potential(zp) - sm.grad_potential(zm)) / (2 * h);
      }
      CHECK((fd - H).norm() <= 1e-5 * std::max(1.0, H.norm()));
      Eigen::SelfAdjointEigenSolver<Matrix> es(H);
      CHECK(es.eigenvalues().minCoeff() >= 1 / d2 - R2 / (d2 * d2) - 1e-9);
      CHECK(es.eigenvalues().maxCoeff() <= 1 / d2 + 1e-9);
    }
  }
}

TEST_CASE("tilted moments") {
  Matrix X(1, 2);
  X << -1, 1;
  const SmoothedMeasure two(BallMeasure::uniform(X), 1.0);
  auto m0 = two.tilted_moments(vec({0.0}));
  CHECK(std::abs(m0.mean[0]) < 1e-15);
  CHECK(m0.covariance(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  auto big = two.tilted_moments(vec({800.0}));
  CHECK(big.mean[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(big.covariance(0, 0) < 1e-12);

  const auto sm = random_measure(2, 7, 0.8, 30);
  const Vector z = vec({0.4, -0.9});
  const double d2 = 0.64;
  Vector w(7);
  for (int i = 0; i < 7; ++i) {
    const Vector x = sm.base().atom(i);
    w[i] = sm.base().weights()[i] * std::exp(z.dot(x) / d2 - x.squaredNorm() / (2 * d2));
  }
  w /= w.sum();
  const Vector mean = sm.base().atoms() * w;
  Matrix cov = Matrix::Zero(2, 2);
  for (int i = 0; i < 7; ++i) {
    const Vector c = sm.base().atom(i) - mean;
    cov += w[i] * c * c.transpose();
  }
  const auto tm = sm.tilted_moments(z);
  CHECK((tm.mean - mean).norm() < 1e-13);
  CHECK((tm.covariance - cov).norm() < 1e-13);
  CHECK(tm.mean.norm() <= sm.radius() + 1e-12);
}

TEST_CASE("sampling") {
  CHECK_THROWS_AS(sample(SmoothedMeasure(BallMeasure::point_mass(1), 1.0), 0, 1), InputError);
  const SmoothedMeasure g(BallMeasure::point_mass(3), 0.5);
  const std::size_t n = 200000;
  const Matrix S = sample(g, n, 7);
  CHECK(S.rows() == 3);
  CHECK(S.rowwise().mean().norm() <= 3 * 0.5 * std::sqrt(3.0 / n));
  CHECK(S == sample(g, n, 7));
  CHECK(S != sample(g, n, 8));

  const auto sm = random_measure(2, 4, 0.7, 40);
  const Matrix T = sample(sm, n, 9);
  const Vector sq = T.colwise().squaredNorm().transpose();
  double ex2 = 0.0;
  for (int i = 0; i < 4; ++i) ex2 += sm.base().weights()[i] * sm.base().atom(i).squaredNorm();
  ex2 += 2 * 0.49;
  const double mean = sq.mean();
  const double se = std::sqrt((sq.array() - mean).square().sum() / (n - 1.0) / n);
  CHECK(std::abs(mean - ex2) <= 3 * se);
}

TEST_CASE("rescale") {
  const auto sm = random_measure(2, 3, 0.9, 50);
  const auto id = rescale(sm, 1.0);
  CHECK(id.base().atoms() == sm.base().atoms());
  CHECK(id.delta() == sm.delta());
  const double s = 2.5;
  const auto r = rescale(sm, s);
  CHECK(r.delta() == doctest::Approx(sm.delta() / s).epsilon(1e-15));
  CHECK(r.radius() == doctest::Approx(sm.radius() / s).epsilon(1e-15));
  std::mt19937_64 rng(51);
  std::normal_distribution<double> n;
  for (int t = 0; t < 100; ++t) {
    const Vector z = vec({n(rng), n(rng)});
    CHECK(r.density(z) == doctest::Approx(s * s * sm.density(s * z)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rescale(sm, 0.0), InputError);
}

TEST_CASE("density integrates to one") {
  // Trapezoid on [-(R + 8 delta), R + 8 delta]^d.
  const auto sm1 = random_measure(1, 4, 0.6, 60);
  const double L1 = sm1.radius() + 8 * sm1.delta();
  const int n1 = 4001;
  double s1 = 0.0;
  for (int i = 0; i < n1; ++i) {
    const double x = -L1 + 2 * L1 * i / (n1 - 1.0);
    s1 += (i == 0 || i == n1 - 1 ? 0.5 : 1.0) * sm1.density(vec({x}));
  }
  CHECK(s1 * 2 * L1 / (n1 - 1.0) == doctest::Approx(1.0).epsilon(1e-6));

  const auto sm2 = random_measure(2, 3, 0.8, 61);
  const double L2 = sm2.radius() + 8 * sm2.delta();
  const int n2 = 301;
  const double h = 2 * L2 / (n2 - 1.0);
  double s2 = 0.0;
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j) {
      const double wi = (i == 0 || i == n2 - 1) ? 0.5 : 1.0;
      const double wj = (j == 0 || j == n2 - 1) ? 0.5 : 1.0;
      s2 += wi * wj * sm2.density(vec({-L2 + i * h, -L2 + j * h}));
    }
  CHECK(s2 * h * h == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("measure files round-trip exactly") {
  const auto sm = random_measure(3, 5, 0.37, 70);
  std::stringstream ss;
  write_measure(ss, sm);
  const auto back = read_measure(ss);
  CHECK(back.base().atoms() == sm.base().atoms());
  CHECK(back.base().weights() == sm.base().weights());
  CHECK(back.delta() == sm.delta());
  std::stringstream again;
  write_measure(again, back);
  std::stringstream first;
  write_measure(first, sm);
  CHECK(again.str() == first.str());

  std::istringstream bad("2 2 1.0\n0.5 1 2\n0.5 1\n");
  CHECK_THROWS_AS(read_measure(bad), InputError);
  std::istringstream neg("1 1 -1\n1 0\n");
  CHECK_THROWS_AS(read_measure(neg), InputError);
  CHECK_THROWS_AS(read_measure_file("/nonexistent/measure.txt"), InputError);
}
