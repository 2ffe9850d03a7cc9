#include "kernel_detail.hpp"

#ifdef LSICERT_HAVE_OPENMP
#include <omp.h>
#endif

namespace lsicert::kernels {

int max_threads() {
#ifdef LSICERT_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef LSICERT_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace omp {

Vector log_density_points(const SmoothedMeasure& sm, const Matrix& points) {
  require(points.rows() == sm.dimension(), "points must have the measure's dimension");
  Vector out(points.cols());
  const Eigen::Index n = points.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < n; ++k) out[k] = sm.log_density(points.col(k));
  return out;
}

Matrix cost_matrix(const Matrix& source, const Matrix& target, const CostSpec& spec) {
  spec.validate();
  require(source.rows() == target.rows(), "source and target dimensions differ");
  Matrix C(source.cols(), target.cols());
  const Eigen::Index nt = target.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < nt; ++j) {
    for (Eigen::Index i = 0; i < source.cols(); ++i) {
      C(i, j) = cost_eval_unchecked(spec, source.col(i), target.col(j));
    }
  }
  return C;
}

Matrix sample(const SmoothedMeasure& sm, std::size_t n, std::uint64_t seed) {
  Matrix out(sm.dimension(), static_cast<Eigen::Index>(n));
  const std::ptrdiff_t chunks = static_cast<std::ptrdiff_t>((n + kSampleChunk - 1) / kSampleChunk);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    detail::sample_chunk(sm, static_cast<std::size_t>(c), n, seed, out);
  }
  return out;
}

HessianRange hessian_range(const SmoothedMeasure& sm, const Matrix& points) {
  require(points.rows() == sm.dimension(), "points must have the measure's dimension");
  HessianRange total = detail::empty_range();
  const Eigen::Index n = points.cols();
#pragma omp parallel
  {
    HessianRange local = detail::empty_range();
#pragma omp for schedule(static) nowait
    for (Eigen::Index k = 0; k < n; ++k) detail::hessian_at(sm, points.col(k), local);
#pragma omp critical
    detail::merge(total, local);
  }
  return total;
}

std::vector<std::size_t> count_at_least(const Vector& values, std::span<const double> thresholds) {
  const std::ptrdiff_t nt = static_cast<std::ptrdiff_t>(thresholds.size());
  std::vector<std::size_t> counts(thresholds.size(), 0);
  const Eigen::Index n = values.size();
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    std::size_t c = 0;
    const double thr = thresholds[static_cast<std::size_t>(t)];
#pragma omp parallel for schedule(static) reduction(+ : c)
    for (Eigen::Index k = 0; k < n; ++k) c += values[k] >= thr;
    counts[static_cast<std::size_t>(t)] = c;
  }
  return counts;
}

Vector gaussian_smooth(const ScalarField& f, const Matrix& offsets, const Vector& weights,
                       const Matrix& points) {
  require(offsets.rows() == points.rows(), "offset and point dimensions differ");
  require(offsets.cols() == weights.size(), "one weight per offset required");
  Vector out(points.cols());
  const Eigen::Index n = points.cols();
#pragma omp parallel for schedule(dynamic, 16)
  for (Eigen::Index k = 0; k < n; ++k) {
    out[k] = detail::smooth_at(f, offsets, weights, points.col(k));
  }
  return out;
}

}  // namespace omp
}  // namespace lsicert::kernels
