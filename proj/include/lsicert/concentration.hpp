#pragma once

#include "lsicert/common.hpp"
#include "lsicert/grid.hpp"
#include "lsicert/measure.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsicert {

/// 1-Lipschitz test functions with the constant certified by construction.
struct LipschitzSpec {
  enum class Kind { linear, distance_to_point, max_coordinate };
  Kind kind = Kind::linear;
  Vector vector;  // direction (linear) or point (distance)
  int dimension = 1;

  /// Rejects |a| > 1.
  static LipschitzSpec linear(Vector a);
  static LipschitzSpec distance_to_point(Vector p);
  static LipschitzSpec max_coordinate(int d);

  double lipschitz_constant() const;
  double operator()(Eigen::Ref<const Vector> x) const;
  std::string name() const;
};

struct TailCheckReport {
  std::string function;
  std::vector<double> t_values;
  std::vector<double> empirical_tail;
  std::vector<double> standard_error;
  std::vector<double> theoretical_bound;
  std::vector<bool> violation;
  int violations = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double m_hat = 0.0;
  double epsilon = 0.0;
  double t_epsilon = 0.0;  // 2R / (1 - sqrt(eps))
};

/// exp(-[t - 2R]_+^2 / (2 delta^2)).
double herbst_bound(double t, double delta, double R);

/// P(f(S) >= m_hat + t) from n draws, m_hat from an independent batch of n
/// draws. The standard error adds the binomial term and the density at the
/// threshold times the standard error of m_hat. A violation needs
/// empirical - 3 SE > bound.
TailCheckReport herbst_tail_check(const SmoothedMeasure& sm, const LipschitzSpec& f,
                                  const std::vector<double>& t_grid, std::size_t n, std::uint64_t seed,
                                  double epsilon = 0.5);

struct KappaReport {
  double kappa = 0.0;  // R^2/delta^4 - 1/delta^2
  bool kappa_positive = false;
  double ratio = 0.0;      // R / delta
  double threshold = 0.0;  // sqrt(1 + eps)
  bool in_region = false;  // R / sqrt(2) < delta < R
  bool hypothesis_holds = false;  // eps / (2 delta^2) >= kappa / 2
  bool applicable = false;
};

KappaReport kappa_region(double delta, double R, double eps);

struct ConvexFunction {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

ConvexFunction convex_affine(Vector a, double b);
ConvexFunction convex_max_affine(std::vector<Vector> slopes, std::vector<double> offsets);
/// x^T Q x / 2 + a.x + b; Q must be symmetric positive semidefinite.
ConvexFunction convex_quadratic(Matrix Q, Vector a, double b);
ConvexFunction convex_sum(ConvexFunction f, ConvexFunction g);
ConvexFunction convex_max(ConvexFunction f, ConvexFunction g);
/// x -> f(A x + c).
ConvexFunction convex_precompose(ConvexFunction f, Matrix A, Vector c);

/// Constant, affine, max-affine, quadratic and composed members.
std::vector<ConvexFunction> builtin_convex_family(int d, double delta, std::uint64_t seed);

struct ConvexLsiRow {
  std::string name;
  double ratio = 0.0;
  bool skipped = false;
};

struct ConvexLsiReport {
  std::vector<ConvexLsiRow> rows;
  double max_ratio = 0.0;
  double bound = 0.0;  // 8 (delta^2 + 4 R^2)
  bool passed = true;
  std::string method;  // "grid" or "monte-carlo"
};

/// Ent(e^f) / int |grad f|^2 e^f, by grid quadrature when a grid is given
/// (d <= 2) and by Monte Carlo otherwise. Passes when every ratio is at most
/// bound (1 + 1e-3).
ConvexLsiReport convex_lsi_check(const SmoothedMeasure& sm, const std::vector<ConvexFunction>& family,
                                 const std::optional<GridDomain>& grid, std::size_t mc_samples,
                                 std::uint64_t seed);

struct InfConvolutionReport {
  int trials = 0;
  double max_abs_error = 0.0;
  double max_split_error = 0.0;
  bool passed = true;
};

/// Minimizes |x1 - y1|^2/(16R^2) + |x2 - y2|^2/(4 delta^2) over y1 + y2 = y by
/// Newton iteration and compares with |x1 + x2 - y|^2 / (4 (delta^2 + 4R^2)).
InfConvolutionReport inf_convolution_identity(double R, double delta, int trials, std::uint64_t seed);

struct SweepRecord {
  int d = 0;
  int N = 0;
  std::uint64_t seed = 0;
  std::string measure;  // point, two-point, simplex, sphere, random
  std::string digest;
  std::string estimator;
  double estimate = 0.0;
  std::string candidate;
  double candidate_bound = 0.0;
  double ratio = 0.0;
  std::string flag;  // ok, investigate, skipped
  std::string reason;
};

struct SweepOptions {
  int grid_nodes_1d = 801;
  int grid_nodes_2d = 81;
  bool poincare = true;  // grid Poincare estimate for d <= 2
};

/// Structured (point mass, two-point, simplex, sphere) and random N-point
/// measures per dimension, with exponential-family estimates compared to the
/// dimension-free candidates. Records are ordered by d, then by measure.
std::vector<SweepRecord> conjecture_sweep(const std::vector<int>& d_list, const std::function<int(int)>& N_of_d,
                                          double R, double delta, int per_d_trials, std::uint64_t seed,
                                          const SweepOptions& opts = {});

/// 64-bit FNV-1a of the measure file text, as 16 hex digits.
std::string measure_digest(const SmoothedMeasure& sm);

}  // namespace lsicert
