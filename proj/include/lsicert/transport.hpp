#pragma once

#include "lsicert/common.hpp"
#include "lsicert/costs.hpp"
#include "lsicert/grid.hpp"
#include "lsicert/measure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsicert {

/// Finitely supported distribution: support points as columns, weights summing to 1.
struct DiscreteDistribution {
  Matrix points;
  Vector weights;
};

struct TransportResult {
  double value = 0.0;
  Matrix plan;
  std::string method;        // "exact" or "entropic"
  double eps_reg = 0.0;
  /// exact: primal - dual + dual infeasibility (value - lower_bound).
  /// entropic: value - (guaranteed lower end), from eps_reg and rounding.
  double gap_certificate = 0.0;
  double lower_bound = 0.0;
  double marginal_error = 0.0;
  std::int64_t iterations = 0;
};

/// Largest support product accepted by the exact solver.
inline constexpr std::int64_t kMaxExactEntries = 4'000'000;

TransportResult ot_exact(const DiscreteDistribution& source, const DiscreteDistribution& target,
                         const CostSpec& spec);
/// Same with a precomputed cost matrix (rows: source support).
TransportResult ot_exact(const Vector& a, const Vector& b, const Matrix& C);

/// Log-domain Sinkhorn followed by rounding onto the feasible set, so `value`
/// is the cost of a true coupling (an upper bound on the exact value).
TransportResult ot_entropic(const DiscreteDistribution& source, const DiscreteDistribution& target,
                            const CostSpec& spec, double eps_reg, int max_iter,
                            double marginal_tolerance = 1e-10);
TransportResult ot_entropic(const Vector& a, const Vector& b, const Matrix& C, double eps_reg,
                            int max_iter, double marginal_tolerance = 1e-10);

/// Normalized grid masses of sm (density at nodes over its sum).
Vector grid_density(const SmoothedMeasure& sm, const GridDomain& grid);

/// H(nu | rho) = sum nu log(nu / rho) against the grid masses of sm;
/// +infinity when nu charges a node where rho underflows.
double relative_entropy(const Vector& nu, const SmoothedMeasure& sm, const GridDomain& grid);
double relative_entropy(const Vector& nu, const Vector& rho);

struct GridFamilyMember {
  std::string name;
  Vector weights;
};

/// Tilts exp(theta.x), shifts of the density, and two-component mixtures,
/// all normalized on the grid. Deterministic in `seed`.
std::vector<GridFamilyMember> transport_family(const SmoothedMeasure& sm, const GridDomain& grid,
                                               int count, std::uint64_t seed);

struct TransportEntropyRow {
  std::string member;
  std::string cost_kind;
  double T = 0.0;
  double H = 0.0;
  double ratio = 0.0;
  double bound = 0.0;  // C(R, delta) at the supplied c', NaN when none
  bool pass = true;
  bool skipped = false;
  std::string note;
};

struct TransportEntropyReport {
  std::vector<TransportEntropyRow> rows;
  double max_ratio = 0.0;
  /// Ratio bound divided by the c' = 1 formula: the smallest admissible c'.
  double c_prime_needed = 0.0;
  double formula_at_unit_c = 0.0;
  bool passed = true;
};

/// T_cost(nu, rho) / H(nu | rho) over the family using the exact solver.
/// Quadratic cost is compared with the sqrt(d)-scaled Euclidean variant;
/// the others with C(R, delta). `c_prime` enables the assertion.
TransportEntropyReport verify_transport_entropy(const SmoothedMeasure& sm, const GridDomain& grid,
                                                const std::vector<GridFamilyMember>& family,
                                                const CostSpec& spec,
                                                std::optional<double> c_prime = std::nullopt);

struct InequalityCheck {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  double worst_slack = 0.0;  // min over samples of lhs - rhs + tolerance
  std::vector<double> witness;
};

struct CostChainReport {
  int dimension = 0;
  std::vector<InequalityCheck> checks;
  bool passed = true;
};

/// Samples random pairs at log-uniform scales and checks seven pointwise
/// inequalities between the costs: norm equivalence, k >= |.|_4^2,
/// k >= d^{-1/2}|.|^2, the omega increment bound, alpha sub-multiplicativity,
/// the T-distance lower bound and concavity of alpha(sqrt(.)).
/// Results do not depend on `parallel`.
CostChainReport cost_chain_checks(std::uint64_t n_samples, int d, std::uint64_t seed, bool parallel = true);

}  // namespace lsicert
