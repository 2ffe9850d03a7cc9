#pragma once

#include "lsicert/common.hpp"

#include <cstdint>

namespace lsicert {

/// Primal network simplex for the balanced transportation problem
/// min <P, C> s.t. P 1 = a, P^T 1 = b, P >= 0, on the complete bipartite graph.
/// Block-search pivoting; spanning tree stored with parent/thread/successor
/// arrays; artificial root arcs give the initial feasible tree.
struct NetworkSimplexResult {
  Matrix plan;
  Vector u;  // source potentials
  Vector v;  // target potentials, u_i + v_j <= C_ij up to min_reduced_cost
  double primal = 0.0;
  double dual = 0.0;
  double min_reduced_cost = 0.0;
  double artificial_flow = 0.0;
  std::int64_t pivots = 0;
};

NetworkSimplexResult network_simplex(const Vector& a, const Vector& b, const Matrix& C,
                                     std::int64_t max_pivots = 0);

}  // namespace lsicert
