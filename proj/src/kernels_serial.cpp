#include "kernel_detail.hpp"

namespace lsicert::kernels::serial {

Vector log_density_points(const SmoothedMeasure& sm, const Matrix& points) {
  require(points.rows() == sm.dimension(), "points must have the measure's dimension");
  Vector out(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) out[k] = sm.log_density(points.col(k));
  return out;
}

Matrix cost_matrix(const Matrix& source, const Matrix& target, const CostSpec& spec) {
  spec.validate();
  require(source.rows() == target.rows(), "source and target dimensions differ");
  Matrix C(source.cols(), target.cols());
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    for (Eigen::Index i = 0; i < source.cols(); ++i) {
      C(i, j) = cost_eval_unchecked(spec, source.col(i), target.col(j));
    }
  }
  return C;
}

Matrix sample(const SmoothedMeasure& sm, std::size_t n, std::uint64_t seed) {
  Matrix out(sm.dimension(), static_cast<Eigen::Index>(n));
  const std::size_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  for (std::size_t c = 0; c < chunks; ++c) detail::sample_chunk(sm, c, n, seed, out);
  return out;
}

HessianRange hessian_range(const SmoothedMeasure& sm, const Matrix& points) {
  require(points.rows() == sm.dimension(), "points must have the measure's dimension");
  HessianRange acc = detail::empty_range();
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    detail::hessian_at(sm, points.col(k), acc);
  }
  return acc;
}

std::vector<std::size_t> count_at_least(const Vector& values, std::span<const double> thresholds) {
  std::vector<std::size_t> counts(thresholds.size(), 0);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    for (Eigen::Index k = 0; k < values.size(); ++k) counts[t] += values[k] >= thresholds[t];
  }
  return counts;
}

Vector gaussian_smooth(const ScalarField& f, const Matrix& offsets, const Vector& weights,
                       const Matrix& points) {
  require(offsets.rows() == points.rows(), "offset and point dimensions differ");
  require(offsets.cols() == weights.size(), "one weight per offset required");
  Vector out(points.cols());
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    out[k] = detail::smooth_at(f, offsets, weights, points.col(k));
  }
  return out;
}

}  // namespace lsicert::kernels::serial
