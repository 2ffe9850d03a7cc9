#pragma once

// Data-parallel kernels. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp with the same
// signature and bit-identical results (reductions are ordered per element,
// never across threads). The unqualified kernels::* entry points dispatch to
// the OpenMP version when it is compiled in.

#include "lsicert/common.hpp"
#include "lsicert/costs.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lsicert {

class SmoothedMeasure;

namespace kernels {

/// Extreme Hessian eigenvalues of V = -log p and the largest |grad W_delta|
/// over a point cloud.
struct HessianRange {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double max_grad_w = 0.0;
};

using ScalarField = std::function<double(const Vector&)>;

// Samples are produced in fixed-size chunks, each from its own substream.
inline constexpr std::size_t kSampleChunk = 8192;

#define LSICERT_KERNEL_DECLS                                                                  \
  Vector log_density_points(const SmoothedMeasure& sm, const Matrix& points);                 \
  Matrix cost_matrix(const Matrix& source, const Matrix& target, const CostSpec& spec);       \
  Matrix sample(const SmoothedMeasure& sm, std::size_t n, std::uint64_t seed);                \
  HessianRange hessian_range(const SmoothedMeasure& sm, const Matrix& points);                \
  std::vector<std::size_t> count_at_least(const Vector& values,                               \
                                          std::span<const double> thresholds);                \
  Vector gaussian_smooth(const ScalarField& f, const Matrix& offsets, const Vector& weights,  \
                         const Matrix& points);

namespace serial {
LSICERT_KERNEL_DECLS
}  // namespace serial

namespace omp {
LSICERT_KERNEL_DECLS
}  // namespace omp

#undef LSICERT_KERNEL_DECLS

/// Number of threads the OpenMP kernels will use (1 without OpenMP).
int max_threads();
void set_threads(int n);

#ifdef LSICERT_HAVE_OPENMP
using namespace omp;
#else
using namespace serial;
#endif

}  // namespace kernels
}  // namespace lsicert
