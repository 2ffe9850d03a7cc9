#include "lsicert/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lsicert;
using doctest::Approx;

TEST_CASE("gauss-hermite moments") {
  for (int n : {4, 16, 64, 256}) {
    const auto r = gauss_hermite(n);
    CHECK(r.weights.sum() == Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(r.nodes.dot(r.weights)) < 1e-13);
    CHECK(r.nodes.array().square().matrix().dot(r.weights) == Approx(1.0).epsilon(1e-12));
    CHECK(r.nodes.array().pow(4).matrix().dot(r.weights) == Approx(3.0).epsilon(1e-12));
    // Symmetric nodes.
    for (int i = 0; i < n; ++i) CHECK(r.nodes[i] == Approx(-r.nodes[n - 1 - i]).epsilon(1e-12));
  }
  // E cos(Z) = exp(-1/2).
  const auto r = gauss_hermite(40);
  CHECK(r.nodes.array().cos().matrix().dot(r.weights) == Approx(std::exp(-0.5)).epsilon(1e-14));
}

TEST_CASE("gauss-legendre integrals") {
  const auto r = gauss_legendre(20, 0.0, std::numbers::pi);
  CHECK(r.nodes.array().sin().matrix().dot(r.weights) == Approx(2.0).epsilon(1e-14));
  const auto s = gauss_legendre(5, -1, 3);
  CHECK(s.weights.sum() == Approx(4.0).epsilon(1e-14));
  // Exact for degree 9.
  CHECK(s.nodes.array().pow(9).matrix().dot(s.weights) == Approx((std::pow(3.0, 10) - 1) / 10).epsilon(1e-13));
}

TEST_CASE("gaussian cubature") {
  const auto c = gaussian_cubature(2, 10, 0.5);
  CHECK(c.offsets.rows() == 2);
  CHECK(c.offsets.cols() == 100);
  CHECK(c.weights.sum() == Approx(1.0).epsilon(1e-13));
  double m2 = 0.0;
  for (Eigen::Index q = 0; q < c.offsets.cols(); ++q) m2 += c.weights[q] * c.offsets.col(q).squaredNorm();
  CHECK(m2 == Approx(2 * 0.25).epsilon(1e-12));
  CHECK_THROWS(gaussian_cubature(3, 4, 1.0));
}
