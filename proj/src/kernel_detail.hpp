#pragma once

// Per-element bodies shared by the serial and OpenMP kernels.

#include "lsicert/kernels.hpp"
#include "lsicert/measure.hpp"
#include "lsicert/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <random>

namespace lsicert::kernels::detail {

inline void sample_chunk(const SmoothedMeasure& sm, std::size_t chunk, std::size_t n,
                         std::uint64_t seed, Matrix& out) {
  const std::size_t first = chunk * kSampleChunk;
  const std::size_t last = std::min(n, first + kSampleChunk);
  Rng rng = make_rng(seed, chunk);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const auto& w = sm.base().weights();
  const int natoms = sm.base().size();
  const int d = sm.dimension();
  for (std::size_t s = first; s < last; ++s) {
    int atom = 0;
    if (natoms > 1) {
      double u = unif(rng);
      while (atom < natoms - 1 && u >= w[atom]) {
        u -= w[atom];
        ++atom;
      }
    }
    for (int k = 0; k < d; ++k) {
      out(k, static_cast<Eigen::Index>(s)) = sm.base().atoms()(k, atom) + sm.delta() * normal(rng);
    }
  }
}

inline void hessian_at(const SmoothedMeasure& sm, const Vector& z, HessianRange& acc) {
  const Matrix H = sm.hessian_potential(z);
  Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
  acc.min_eigenvalue = std::min(acc.min_eigenvalue, es.eigenvalues().minCoeff());
  acc.max_eigenvalue = std::max(acc.max_eigenvalue, es.eigenvalues().maxCoeff());
  acc.max_grad_w = std::max(acc.max_grad_w, sm.grad_w_delta(z).norm());
}

inline HessianRange empty_range() {
  return {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
}

inline void merge(HessianRange& a, const HessianRange& b) {
  a.min_eigenvalue = std::min(a.min_eigenvalue, b.min_eigenvalue);
  a.max_eigenvalue = std::max(a.max_eigenvalue, b.max_eigenvalue);
  a.max_grad_w = std::max(a.max_grad_w, b.max_grad_w);
}

inline double smooth_at(const ScalarField& f, const Matrix& offsets, const Vector& weights,
                        const Vector& x) {
  double acc = 0.0;
  Vector y(x.size());
  for (Eigen::Index q = 0; q < offsets.cols(); ++q) {
    y = x + offsets.col(q);
    acc += weights[q] * f(y);
  }
  return acc;
}

}  // namespace lsicert::kernels::detail
