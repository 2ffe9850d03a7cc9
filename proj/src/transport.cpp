#include "lsicert/transport.hpp"

#include "lsicert/bounds.hpp"
#include "lsicert/kernels.hpp"
#include "lsicert/network_simplex.hpp"
#include "lsicert/rng.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace lsicert {

std::string to_string(CostKind k) {
  switch (k) {
    case CostKind::quadratic: return "quadratic";
    case CostKind::l4sq: return "l4sq";
    case CostKind::paper_k: return "paper_k";
    case CostKind::tilde_k: return "tilde_k";
  }
  return "unknown";
}

CostKind parse_cost_kind(const std::string& s) {
  if (s == "quadratic") return CostKind::quadratic;
  if (s == "l4sq") return CostKind::l4sq;
  if (s == "paper_k" || s == "k") return CostKind::paper_k;
  if (s == "tilde_k") return CostKind::tilde_k;
  throw InputError("unknown cost kind '" + s + "'");
}

namespace {

void check_marginal(const Vector& w, const std::string& what) {
  require(w.size() > 0, what + " is empty");
  require(w.allFinite() && (w.array() >= 0.0).all(), what + " weights must be finite and nonnegative");
  require(std::abs(w.sum() - 1.0) <= 1e-9, what + " weights must sum to 1 within 1e-9");
}

void check_distribution(const DiscreteDistribution& p, const std::string& what) {
  require(p.points.cols() == p.weights.size(), what + ": one weight per support point required");
  check_marginal(p.weights, what);
}

std::vector<Eigen::Index> positive_indices(const Vector& w) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) idx.push_back(i);
  return idx;
}

double marginal_error(const Matrix& P, const Vector& a, const Vector& b) {
  return (P.rowwise().sum() - a).lpNorm<1>() + (P.colwise().sum().transpose() - b).lpNorm<1>();
}

double shannon(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}

}  // namespace

TransportResult ot_exact(const Vector& a, const Vector& b, const Matrix& C) {
  check_marginal(a, "source");
  check_marginal(b, "target");
  require(C.rows() == a.size() && C.cols() == b.size(), "cost matrix shape does not match the marginals");
  require(static_cast<std::int64_t>(a.size()) * b.size() <= kMaxExactEntries,
          "support too large for the exact solver; use the entropic solver");
  // Zero-mass points carry no flow; solve on the positive supports.
  const auto ia = positive_indices(a), ib = positive_indices(b);
  Vector ar(static_cast<Eigen::Index>(ia.size())), br(static_cast<Eigen::Index>(ib.size()));
  Matrix Cr(ar.size(), br.size());
  for (std::size_t i = 0; i < ia.size(); ++i) ar[static_cast<Eigen::Index>(i)] = a[ia[i]];
  for (std::size_t j = 0; j < ib.size(); ++j) br[static_cast<Eigen::Index>(j)] = b[ib[j]];
  for (std::size_t j = 0; j < ib.size(); ++j)
    for (std::size_t i = 0; i < ia.size(); ++i) Cr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = C(ia[i], ib[j]);

  const NetworkSimplexResult ns = network_simplex(ar, br, Cr);
  if (ns.artificial_flow > 1e-9) throw SolverError("transport problem infeasible", ns.artificial_flow);

  TransportResult r;
  r.method = "exact";
  r.plan = Matrix::Zero(a.size(), b.size());
  for (std::size_t j = 0; j < ib.size(); ++j)
    for (std::size_t i = 0; i < ia.size(); ++i)
      r.plan(ia[i], ib[j]) = ns.plan(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  r.value = (r.plan.array() * C.array()).sum();
  // Shifting v by a negative minimum reduced cost restores dual feasibility.
  r.lower_bound = ns.dual + std::min(0.0, ns.min_reduced_cost) * br.sum();
  r.gap_certificate = std::max(0.0, r.value - r.lower_bound);
  r.marginal_error = marginal_error(r.plan, a, b);
  r.iterations = ns.pivots;
  return r;
}

TransportResult ot_exact(const DiscreteDistribution& source, const DiscreteDistribution& target,
                         const CostSpec& spec) {
  check_distribution(source, "source");
  check_distribution(target, "target");
  require(source.points.rows() == target.points.rows(), "source and target dimensions differ");
  spec.validate();
  require(static_cast<std::int64_t>(source.weights.size()) * target.weights.size() <= kMaxExactEntries,
          "support too large for the exact solver; use the entropic solver");
  return ot_exact(source.weights, target.weights, kernels::cost_matrix(source.points, target.points, spec));
}

TransportResult ot_entropic(const Vector& a, const Vector& b, const Matrix& C, double eps_reg, int max_iter,
                            double marginal_tolerance) {
  check_marginal(a, "source");
  check_marginal(b, "target");
  require(C.rows() == a.size() && C.cols() == b.size(), "cost matrix shape does not match the marginals");
  require(eps_reg > 0.0 && std::isfinite(eps_reg), "eps_reg must be positive");
  require(max_iter >= 1, "max_iter must be positive");
  const auto ia = positive_indices(a), ib = positive_indices(b);
  const auto n = static_cast<Eigen::Index>(ia.size()), m = static_cast<Eigen::Index>(ib.size());
  Vector ar(n), br(m);
  Matrix Cr(n, m);
  for (Eigen::Index i = 0; i < n; ++i) ar[i] = a[ia[static_cast<std::size_t>(i)]];
  for (Eigen::Index j = 0; j < m; ++j) br[j] = b[ib[static_cast<std::size_t>(j)]];
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Cr(i, j) = C(ia[static_cast<std::size_t>(i)], ib[static_cast<std::size_t>(j)]);

  const Vector la = ar.array().log().matrix(), lb = br.array().log().matrix();
  Vector f = Vector::Zero(n), g = Vector::Zero(m), tmp;
  double err = std::numeric_limits<double>::infinity();
  int it = 0;
  auto row_lse = [&](Eigen::Index i) {
    tmp = (g - Cr.row(i).transpose()) / eps_reg;
    return log_sum_exp(tmp);
  };
  for (; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) f[i] = eps_reg * (la[i] - row_lse(i));
    for (Eigen::Index j = 0; j < m; ++j) {
      tmp = (f - Cr.col(j)) / eps_reg;
      g[j] = eps_reg * (lb[j] - log_sum_exp(tmp));
    }
    err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) err += std::abs(std::exp(f[i] / eps_reg + row_lse(i)) - ar[i]);
    if (err <= marginal_tolerance) break;
  }
  if (err > marginal_tolerance) throw SolverError("Sinkhorn did not reach the marginal tolerance", err);

  Matrix P(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) P(i, j) = std::exp((f[i] + g[j] - Cr(i, j)) / eps_reg);
  const Vector r = P.rowwise().sum();
  const double err_iter = (r - ar).lpNorm<1>() + (P.colwise().sum().transpose() - br).lpNorm<1>();
  // Round onto the transport polytope.
  for (Eigen::Index i = 0; i < n; ++i) P.row(i) *= std::min(1.0, ar[i] / r[i]);
  const Vector c = P.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < m; ++j) P.col(j) *= std::min(1.0, br[j] / c[j]);
  const Vector ea = ar - P.rowwise().sum(), eb = br - P.colwise().sum().transpose();
  const double ea1 = ea.lpNorm<1>();
  if (ea1 > 0.0) P += ea * eb.transpose() / ea1;

  TransportResult res;
  res.method = "entropic";
  res.eps_reg = eps_reg;
  res.plan = Matrix::Zero(a.size(), b.size());
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) res.plan(ia[static_cast<std::size_t>(i)], ib[static_cast<std::size_t>(j)]) = P(i, j);
  res.value = (res.plan.array() * C.array()).sum();
  const double cmax = Cr.cwiseAbs().maxCoeff();
  res.gap_certificate = eps_reg * std::min(shannon(r / r.sum()), shannon(br)) + 3.0 * cmax * err_iter;
  res.lower_bound = res.value - res.gap_certificate;
  res.marginal_error = marginal_error(res.plan, a, b);
  res.iterations = it + 1;
  return res;
}

TransportResult ot_entropic(const DiscreteDistribution& source, const DiscreteDistribution& target,
                            const CostSpec& spec, double eps_reg, int max_iter, double marginal_tolerance) {
  check_distribution(source, "source");
  check_distribution(target, "target");
  require(source.points.rows() == target.points.rows(), "source and target dimensions differ");
  spec.validate();
  return ot_entropic(source.weights, target.weights, kernels::cost_matrix(source.points, target.points, spec),
                     eps_reg, max_iter, marginal_tolerance);
}

Vector grid_density(const SmoothedMeasure& sm, const GridDomain& grid) {
  require(sm.dimension() == grid.dimension(), "grid and measure dimensions differ");
  const Vector lp = kernels::log_density_points(sm, grid.nodes());
  return (lp.array() - log_sum_exp(lp)).exp().matrix();
}

double relative_entropy(const Vector& nu, const Vector& rho) {
  require(nu.size() == rho.size(), "distributions have different sizes");
  check_marginal(nu, "nu");
  double h = 0.0;
  for (Eigen::Index k = 0; k < nu.size(); ++k) {
    if (nu[k] == 0.0) continue;
    if (!(rho[k] > 0.0)) return std::numeric_limits<double>::infinity();
    h += nu[k] * std::log(nu[k] / rho[k]);
  }
  return std::max(h, 0.0);
}

double relative_entropy(const Vector& nu, const SmoothedMeasure& sm, const GridDomain& grid) {
  require(nu.size() == grid.size(), "nu must live on the grid nodes");
  return relative_entropy(nu, grid_density(sm, grid));
}

std::vector<GridFamilyMember> transport_family(const SmoothedMeasure& sm, const GridDomain& grid, int count,
                                               std::uint64_t seed) {
  require(count >= 1, "family size must be positive");
  const int d = sm.dimension();
  const Matrix nodes = grid.nodes();
  const Vector lp = kernels::log_density_points(sm, nodes);
  const double scale = sm.radius() + sm.delta();
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto direction = [&]() {
    Vector u(d);
    for (int k = 0; k < d; ++k) u[k] = normal(rng);
    return Vector(u / u.norm());
  };
  auto normalize_log = [](const Vector& l) { return Vector((l.array() - log_sum_exp(l)).exp().matrix()); };
  auto tilt = [&]() {
    const Vector theta = (0.2 + 1.3 * unif(rng)) / scale * direction();
    return normalize_log(lp + nodes.transpose() * theta);
  };
  auto shift = [&]() {
    const Vector s = (0.1 + 0.9 * unif(rng)) * sm.delta() * direction();
    Matrix moved = nodes;
    moved.colwise() -= s;
    return normalize_log(kernels::log_density_points(sm, moved));
  };
  const Vector rho = normalize_log(lp);
  std::vector<GridFamilyMember> out;
  for (int k = 0; k < count; ++k) {
    GridFamilyMember m;
    switch (k % 3) {
      case 0:
        m.name = "tilt" + std::to_string(k);
        m.weights = tilt();
        break;
      case 1:
        m.name = "shift" + std::to_string(k);
        m.weights = shift();
        break;
      default: {
        const double t = 0.2 + 0.6 * unif(rng);
        const Vector other = unif(rng) < 0.5 ? tilt() : shift();
        m.name = "mix" + std::to_string(k);
        m.weights = (1.0 - t) * rho + t * other;
        m.weights /= m.weights.sum();
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

TransportEntropyReport verify_transport_entropy(const SmoothedMeasure& sm, const GridDomain& grid,
                                                const std::vector<GridFamilyMember>& family, const CostSpec& spec,
                                                std::optional<double> c_prime) {
  require(sm.dimension() <= 2, "transport verification runs on 1D/2D grids");
  spec.validate();
  if (c_prime) require(*c_prime > 0.0, "c' must be positive");
  const Matrix nodes = grid.nodes();
  const Vector rho = grid_density(sm, grid);
  const Matrix C = kernels::cost_matrix(nodes, nodes, spec);
  const TransportBound tb = bound_transport(sm.delta(), sm.radius(), 1.0, sm.dimension());
  const double base = spec.kind == CostKind::quadratic ? *tb.euclidean.value : *tb.l4.value;

  TransportEntropyReport rep;
  rep.formula_at_unit_c = base;
  rep.rows.resize(family.size());
  std::vector<std::exception_ptr> errors(family.size());
  const auto nf = static_cast<std::ptrdiff_t>(family.size());
#ifdef LSICERT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t k = 0; k < nf; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    try {
      TransportEntropyRow& row = rep.rows[uk];
      row.member = family[uk].name;
      row.cost_kind = to_string(spec.kind);
      row.bound = c_prime ? *c_prime * base : std::numeric_limits<double>::quiet_NaN();
      row.H = relative_entropy(family[uk].weights, rho);
      if (!(row.H > 1e-14)) {
        row.skipped = true;
        row.note = "H = 0";
        continue;
      }
      row.T = ot_exact(family[uk].weights, rho, C).value;
      row.ratio = row.T / row.H;
      row.pass = !c_prime || row.ratio <= row.bound;
    } catch (...) {
      errors[uk] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& row : rep.rows) {
    if (row.skipped) continue;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    rep.passed = rep.passed && row.pass;
  }
  rep.c_prime_needed = rep.max_ratio / base;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::uint64_t kChainChunk = 8192;

struct ChainAccumulator {
  std::vector<InequalityCheck> checks;

  explicit ChainAccumulator(int count) : checks(static_cast<std::size_t>(count)) {
    for (auto& c : checks) c.worst_slack = std::numeric_limits<double>::infinity();
  }

  void record(std::size_t k, double lhs, double rhs, std::initializer_list<double> witness) {
    InequalityCheck& c = checks[k];
    const double slack = lhs - rhs + 1e-12 * std::max(1.0, std::abs(rhs));
    ++c.checked;
    if (slack < c.worst_slack) c.worst_slack = slack;
    if (slack < 0.0) {
      if (c.violations == 0) c.witness.assign(witness);
      ++c.violations;
    }
  }

  void merge(const ChainAccumulator& o) {
    for (std::size_t k = 0; k < checks.size(); ++k) {
      InequalityCheck& c = checks[k];
      const InequalityCheck& b = o.checks[k];
      if (c.violations == 0 && b.violations > 0) c.witness = b.witness;
      c.checked += b.checked;
      c.violations += b.violations;
      c.worst_slack = std::min(c.worst_slack, b.worst_slack);
    }
  }
};

const char* const kChainNames[] = {
    "norm_equivalence_l4_l2", "k_ge_l4_squared",       "k_ge_scaled_l2_squared", "omega_increment",
    "alpha_submultiplicative", "T_distance_lower_bound", "alpha_sqrt_midpoint_concavity"};
constexpr int kChainCount = 7;

void chain_chunk(std::uint64_t chunk, std::uint64_t n, int d, std::uint64_t seed, ChainAccumulator& acc) {
  Rng rng = make_rng(seed, chunk);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> expo(-4.0, 2.0), unif(0.0, 1.0);
  auto magnitude = [&]() { return std::pow(10.0, expo(rng)); };
  auto signed_scalar = [&]() { return (unif(rng) < 0.5 ? -1.0 : 1.0) * magnitude(); };
  const std::uint64_t first = chunk * kChainChunk;
  const std::uint64_t last = std::min(n, first + kChainChunk);
  const double d4 = std::pow(static_cast<double>(d), 0.25);
  const double dsqrt = std::sqrt(static_cast<double>(d));
  Vector x(d), y(d);
  for (std::uint64_t s = first; s < last; ++s) {
    const double sx = magnitude(), sy = magnitude();
    for (int k = 0; k < d; ++k) {
      x[k] = sx * normal(rng);
      y[k] = sy * normal(rng);
    }
    const Vector z = x - y;
    const double e2 = z.squaredNorm(), e = std::sqrt(e2);
    const double q4 = l4_norm_pow4(z), q = std::sqrt(std::sqrt(q4));
    const double k = paper_k_cost(z);
    acc.record(0, e, q, {x[0], y[0]});
    acc.record(0, d4 * q, e, {x[0], y[0]});
    acc.record(1, k, q * q, {x[0], y[0]});
    acc.record(2, k, e2 / dsqrt, {x[0], y[0]});
    const double u = signed_scalar(), v = signed_scalar();
    acc.record(3, std::abs(omega(u) - omega(v)), omega(std::abs(u - v) / 2.0), {u, v});
    const double a = signed_scalar();
    acc.record(4, alpha(a * u), alpha(a) * alpha(u), {a, u});
    double t2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double t = omega(x[i]) - omega(y[i]);
      t2 += t * t;
    }
    acc.record(5, t2, (0.5 * e2 + 0.5 * q4) / 32.0, {x[0], y[0]});
    const double s1 = magnitude() * magnitude(), s2 = magnitude() * magnitude();
    acc.record(6, alpha(std::sqrt(0.5 * (s1 + s2))), 0.5 * (alpha(std::sqrt(s1)) + alpha(std::sqrt(s2))), {s1, s2});
  }
}

}  // namespace

CostChainReport cost_chain_checks(std::uint64_t n_samples, int d, std::uint64_t seed, bool parallel) {
  require(n_samples >= 1, "need at least one sample");
  require(d >= 1, "dimension must be positive");
  const std::uint64_t chunks = (n_samples + kChainChunk - 1) / kChainChunk;
  std::vector<ChainAccumulator> parts(static_cast<std::size_t>(chunks), ChainAccumulator(kChainCount));
  const auto nc = static_cast<std::int64_t>(chunks);
#ifdef LSICERT_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (std::int64_t c = 0; c < nc; ++c) {
    chain_chunk(static_cast<std::uint64_t>(c), n_samples, d, seed, parts[static_cast<std::size_t>(c)]);
  }
  (void)parallel;
  ChainAccumulator total(kChainCount);
  for (const auto& p : parts) total.merge(p);
  CostChainReport rep;
  rep.dimension = d;
  for (int k = 0; k < kChainCount; ++k) {
    InequalityCheck c = total.checks[static_cast<std::size_t>(k)];
    c.name = kChainNames[k];
    rep.passed = rep.passed && c.violations == 0;
    rep.checks.push_back(std::move(c));
  }
  return rep;
}

}  // namespace lsicert
