#pragma once

#include "lsicert/common.hpp"

namespace lsicert {

/// Nodes and weights of a one-dimensional rule.
struct QuadratureRule {
  Vector nodes;
  Vector weights;
};

/// n-point Gauss-Hermite rule for E f(Z), Z ~ N(0, 1) (weights sum to 1).
QuadratureRule gauss_hermite(int n);

/// n-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Tensor-product Gauss-Hermite rule for E f(sigma Z) with Z ~ N(0, I_d):
/// offsets are d x n^d, weights sum to 1.
struct CubatureRule {
  Matrix offsets;
  Vector weights;
};
CubatureRule gaussian_cubature(int d, int order, double sigma);

}  // namespace lsicert
