#include "lsicert/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lsicert {

namespace {

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
QuadratureRule golub_welsch(const Vector& offdiag, double mass) {
  const Eigen::Index n = offdiag.size() + 1;
  Vector diag = Vector::Zero(n);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw SolverError("Golub-Welsch eigensolve failed", 0.0);
  QuadratureRule r;
  r.nodes = es.eigenvalues();
  r.weights = mass * es.eigenvectors().row(0).transpose().array().square();
  // Symmetrize: the exact rule is symmetric about 0.
  for (Eigen::Index i = 0; i < n / 2; ++i) {
    const Eigen::Index j = n - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  r.weights /= r.weights.sum() / mass;
  return r;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  require(n >= 1, "quadrature order must be positive");
  if (n == 1) return {Vector::Zero(1), Vector::Ones(1)};
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(off, 1.0);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  require(n >= 1, "quadrature order must be positive");
  require(b > a, "interval must be nonempty");
  QuadratureRule r;
  if (n == 1) {
    r = {Vector::Zero(1), Vector::Constant(1, 2.0)};
  } else {
    Vector off(n - 1);
    for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    r = golub_welsch(off, 2.0);
  }
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  r.nodes = (r.nodes.array() * half + mid).matrix();
  r.weights *= half;
  return r;
}

CubatureRule gaussian_cubature(int d, int order, double sigma) {
  require(d == 1 || d == 2, "tensor Gauss-Hermite cubature supports d <= 2");
  require(sigma > 0.0, "sigma must be positive");
  const QuadratureRule gh = gauss_hermite(order);
  CubatureRule c;
  if (d == 1) {
    c.offsets = sigma * gh.nodes.transpose();
    c.weights = gh.weights;
    return c;
  }
  const Eigen::Index n = gh.nodes.size();
  c.offsets.resize(2, n * n);
  c.weights.resize(n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      c.offsets(0, i + n * j) = sigma * gh.nodes[i];
      c.offsets(1, i + n * j) = sigma * gh.nodes[j];
      c.weights[i + n * j] = gh.weights[i] * gh.weights[j];
    }
  }
  return c;
}

}  // namespace lsicert
