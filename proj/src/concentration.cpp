#include "lsicert/concentration.hpp"

#include "lsicert/bounds.hpp"
#include "lsicert/kernels.hpp"
#include "lsicert/rng.hpp"
#include "lsicert/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace lsicert {

// ---------------------------------------------------------------------------
// Lipschitz functions

LipschitzSpec LipschitzSpec::linear(Vector a) {
  require(a.size() >= 1, "linear functional needs a direction");
  require(a.allFinite(), "linear functional must be finite");
  require(a.norm() <= 1.0 + 1e-12, "linear functional has Lipschitz constant |a| = " +
                                       format_double(a.norm()) + " > 1");
  LipschitzSpec s;
  s.kind = Kind::linear;
  s.dimension = static_cast<int>(a.size());
  s.vector = std::move(a);
  return s;
}

LipschitzSpec LipschitzSpec::distance_to_point(Vector p) {
  require(p.size() >= 1 && p.allFinite(), "distance function needs a finite point");
  LipschitzSpec s;
  s.kind = Kind::distance_to_point;
  s.dimension = static_cast<int>(p.size());
  s.vector = std::move(p);
  return s;
}

LipschitzSpec LipschitzSpec::max_coordinate(int d) {
  require(d >= 1, "dimension must be at least 1");
  LipschitzSpec s;
  s.kind = Kind::max_coordinate;
  s.dimension = d;
  return s;
}

double LipschitzSpec::lipschitz_constant() const {
  return kind == Kind::linear ? vector.norm() : 1.0;
}

double LipschitzSpec::operator()(Eigen::Ref<const Vector> x) const {
  switch (kind) {
    case Kind::linear: return vector.dot(x);
    case Kind::distance_to_point: return (x - vector).norm();
    case Kind::max_coordinate: return x.maxCoeff();
  }
  return 0.0;
}

std::string LipschitzSpec::name() const {
  switch (kind) {
    case Kind::linear: return "linear";
    case Kind::distance_to_point: return "distance_to_point";
    case Kind::max_coordinate: return "max_coordinate";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Tail check

double herbst_bound(double t, double delta, double R) {
  const double s = std::max(0.0, t - 2.0 * R);
  return std::exp(-s * s / (2.0 * delta * delta));
}

namespace {

Vector evaluate_on_sample(const SmoothedMeasure& sm, const LipschitzSpec& f, std::size_t n,
                          std::uint64_t seed) {
  const Matrix S = kernels::sample(sm, n, seed);
  Vector v(static_cast<Eigen::Index>(n));
#ifdef LSICERT_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f(S.col(i));
  return v;
}

}  // namespace

TailCheckReport herbst_tail_check(const SmoothedMeasure& sm, const LipschitzSpec& f,
                                  const std::vector<double>& t_grid, std::size_t n, std::uint64_t seed,
                                  double epsilon) {
  require(f.dimension == sm.dimension(), "test function dimension does not match the measure");
  require(f.lipschitz_constant() <= 1.0 + 1e-12, "test function is not 1-Lipschitz");
  require(n >= 100000, "tail checks need at least 1e5 samples");
  require(!t_grid.empty(), "t grid is empty");
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  for (double t : t_grid) require(std::isfinite(t) && t >= 0.0, "t values must be finite and nonnegative");

  TailCheckReport rep;
  rep.function = f.name();
  rep.n_samples = n;
  rep.seed = seed;
  rep.epsilon = epsilon;
  rep.t_epsilon = 2.0 * sm.radius() / (1.0 - std::sqrt(epsilon));
  rep.t_values = t_grid;

  // Location from one batch, tail counts from another.
  const Vector first = evaluate_on_sample(sm, f, n, derive_seed(seed, 1));
  const double dn = static_cast<double>(n);
  rep.m_hat = first.mean();
  const double sd = std::sqrt((first.array() - rep.m_hat).square().sum() / (dn - 1.0));
  const double se_mean = sd / std::sqrt(dn);
  const Vector second = evaluate_on_sample(sm, f, n, derive_seed(seed, 2));

  const double h = std::max(0.1 * sd, 1e-12);
  std::vector<double> thresholds;
  thresholds.reserve(3 * t_grid.size());
  for (double t : t_grid) {
    const double c = rep.m_hat + t;
    thresholds.push_back(c);
    thresholds.push_back(c - h);
    thresholds.push_back(c + h);
  }
  const auto counts = kernels::count_at_least(second, thresholds);

  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double p = counts[3 * k] / dn;
    const double density = (static_cast<double>(counts[3 * k + 1]) - counts[3 * k + 2]) / (2.0 * h * dn);
    const double se = std::sqrt(p * (1.0 - p) / dn) + density * se_mean;
    const double bound = herbst_bound(t_grid[k], sm.delta(), sm.radius());
    const bool bad = p - 3.0 * se > bound;
    rep.empirical_tail.push_back(p);
    rep.standard_error.push_back(se);
    rep.theoretical_bound.push_back(bound);
    rep.violation.push_back(bad);
    rep.violations += bad ? 1 : 0;
  }
  return rep;
}

KappaReport kappa_region(double delta, double R, double eps) {
  KappaReport r;
  const double d2 = delta * delta;
  r.kappa = R * R / (d2 * d2) - 1.0 / d2;
  r.kappa_positive = r.kappa > 0.0;
  r.ratio = R / delta;
  r.threshold = std::sqrt(1.0 + eps);
  r.in_region = R / std::sqrt(2.0) < delta && delta < R;
  r.hypothesis_holds = eps / (2.0 * d2) >= r.kappa / 2.0;
  r.applicable = r.in_region && eps > 0.0 && eps < 1.0 && r.ratio < r.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Convex functions

ConvexFunction convex_affine(Vector a, double b) {
  ConvexFunction f;
  f.name = a.isZero(0.0) ? "constant" : "affine";
  f.value = [a, b](const Vector& x) { return a.dot(x) + b; };
  f.gradient = [a](const Vector&) { return a; };
  return f;
}

ConvexFunction convex_max_affine(std::vector<Vector> slopes, std::vector<double> offsets) {
  require(!slopes.empty() && slopes.size() == offsets.size(), "max-affine needs matching slopes and offsets");
  for (const auto& s : slopes) require(s.size() == slopes[0].size(), "max-affine slopes must share a dimension");
  auto argmax = [slopes, offsets](const Vector& x) {
    std::size_t best = 0;
    double v = slopes[0].dot(x) + offsets[0];
    for (std::size_t i = 1; i < slopes.size(); ++i) {
      const double w = slopes[i].dot(x) + offsets[i];
      if (w > v) {
        v = w;
        best = i;
      }
    }
    return std::pair{best, v};
  };
  ConvexFunction f;
  f.name = "max_affine";
  f.value = [argmax](const Vector& x) { return argmax(x).second; };
  f.gradient = [argmax, slopes](const Vector& x) { return slopes[argmax(x).first]; };
  return f;
}

ConvexFunction convex_quadratic(Matrix Q, Vector a, double b) {
  require(Q.rows() == Q.cols() && Q.rows() == a.size(), "quadratic part and slope dimensions differ");
  require((Q - Q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()),
          "quadratic part must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-12, "quadratic part must be positive semidefinite");
  ConvexFunction f;
  f.name = "quadratic_affine";
  f.value = [Q, a, b](const Vector& x) { return 0.5 * x.dot(Q * x) + a.dot(x) + b; };
  f.gradient = [Q, a](const Vector& x) -> Vector { return Q * x + a; };
  return f;
}

ConvexFunction convex_sum(ConvexFunction f, ConvexFunction g) {
  ConvexFunction h;
  h.name = "sum(" + f.name + "," + g.name + ")";
  h.value = [fv = f.value, gv = g.value](const Vector& x) { return fv(x) + gv(x); };
  h.gradient = [fg = f.gradient, gg = g.gradient](const Vector& x) -> Vector { return fg(x) + gg(x); };
  return h;
}

ConvexFunction convex_max(ConvexFunction f, ConvexFunction g) {
  ConvexFunction h;
  h.name = "max(" + f.name + "," + g.name + ")";
  h.value = [fv = f.value, gv = g.value](const Vector& x) { return std::max(fv(x), gv(x)); };
  h.gradient = [fv = f.value, gv = g.value, fg = f.gradient, gg = g.gradient](const Vector& x) {
    return fv(x) >= gv(x) ? fg(x) : gg(x);
  };
  return h;
}

ConvexFunction convex_precompose(ConvexFunction f, Matrix A, Vector c) {
  require(A.rows() == c.size(), "affine map shape mismatch");
  ConvexFunction h;
  h.name = f.name + "@affine";
  h.value = [fv = f.value, A, c](const Vector& x) { return fv(A * x + c); };
  h.gradient = [fg = f.gradient, A, c](const Vector& x) -> Vector { return A.transpose() * fg(A * x + c); };
  return h;
}

std::vector<ConvexFunction> builtin_convex_family(int d, double delta, std::uint64_t seed) {
  require(d >= 1, "dimension must be at least 1");
  require(delta > 0.0, "delta must be positive");
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  auto direction = [&](double length) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    return Vector(v * (length / v.norm()));
  };
  const double s = 1.0 / delta;
  const double q = 0.25 / (delta * delta);

  std::vector<ConvexFunction> out;
  out.push_back(convex_affine(Vector::Zero(d), 1.0));
  out.push_back(convex_affine(Vector::Unit(d, 0) * s, 0.0));
  out.push_back(convex_affine(direction(2.0 * s), 0.3));
  const Vector e = Vector::Unit(d, 0) * s;
  out.push_back(convex_max_affine({e, Vector(-e)}, {0.0, 0.0}));
  out.push_back(convex_max_affine({direction(s), direction(1.5 * s), direction(2.0 * s)},
                                  {0.0, 0.5, -0.5}));
  out.push_back(convex_quadratic(Matrix::Identity(d, d) * q, Vector::Zero(d), 0.0));
  {
    Matrix B(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) B(i, j) = normal(rng);
    Matrix Q = B * B.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q, Eigen::EigenvaluesOnly);
    Q *= q / std::max(es.eigenvalues().maxCoeff(), 1e-300);
    Q = 0.5 * (Q + Q.transpose());
    out.push_back(convex_quadratic(Q, direction(0.5 * s), 0.0));
  }
  out.push_back(convex_sum(convex_max_affine({e * 0.5, Vector(-e * 0.5)}, {0.0, 0.0}),
                           convex_quadratic(Matrix::Identity(d, d) * (0.5 * q), Vector::Zero(d), 0.0)));
  out.push_back(convex_max(convex_quadratic(Matrix::Identity(d, d) * q, Vector::Zero(d), 0.0),
                           convex_affine(direction(s), 0.2)));
  {
    Matrix A = Matrix::Identity(d, d);
    if (d >= 2) {
      const double th = 0.7;
      A(0, 0) = std::cos(th);
      A(0, 1) = -std::sin(th);
      A(1, 0) = std::sin(th);
      A(1, 1) = std::cos(th);
    }
    out.push_back(convex_precompose(convex_max_affine({e, Vector(-0.5 * e)}, {0.0, 0.1}), A,
                                    direction(0.5 * delta)));
  }
  return out;
}

ConvexLsiReport convex_lsi_check(const SmoothedMeasure& sm, const std::vector<ConvexFunction>& family,
                                 const std::optional<GridDomain>& grid, std::size_t mc_samples,
                                 std::uint64_t seed) {
  const int d = sm.dimension();
  ConvexLsiReport rep;
  const double delta = sm.delta(), R = sm.radius();
  rep.bound = 8.0 * (delta * delta + 4.0 * R * R);

  Matrix pts;
  Vector mass;
  if (grid || d <= 2) {
    const GridDomain g = grid ? *grid : GridDomain(d, R + 10.0 * delta, d == 1 ? 2001 : 201);
    require(g.dimension() == d, "grid dimension does not match the measure");
    rep.method = "grid";
    pts = g.nodes();
    const Vector lp = kernels::log_density_points(sm, pts);
    const double top = lp.maxCoeff();
    mass = (lp.array() - top).exp();
    mass /= mass.sum();
  } else {
    require(mc_samples >= 1000, "Monte Carlo convex checks need at least 1000 samples");
    rep.method = "monte-carlo";
    pts = kernels::sample(sm, mc_samples, seed);
    mass = Vector::Constant(pts.cols(), 1.0 / static_cast<double>(pts.cols()));
  }

  const Eigen::Index n = pts.cols();
  for (const auto& f : family) {
    ConvexLsiRow row;
    row.name = f.name;
    Vector fv(n), g2(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Vector x = pts.col(k);
      fv[k] = f.value(x);
      g2[k] = f.gradient(x).squaredNorm();
    }
    const Vector g = (fv.array() - fv.maxCoeff()).exp();
    const double energy = (mass.array() * g2.array() * g.array()).sum();
    if (!(energy > 0.0)) {
      row.skipped = true;
      rep.rows.push_back(row);
      continue;
    }
    row.ratio = weighted_entropy(mass, g) / energy;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    if (!(row.ratio <= rep.bound * (1.0 + 1e-3))) rep.passed = false;
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Inf-convolution

InfConvolutionReport inf_convolution_identity(double R, double delta, int trials, std::uint64_t seed) {
  require(R > 0.0, "inf-convolution identity needs R > 0");
  require(delta > 0.0, "delta must be positive");
  require(trials >= 1, "need at least one trial");
  InfConvolutionReport rep;
  rep.trials = trials;
  const double a = 1.0 / (16.0 * R * R), b = 1.0 / (4.0 * delta * delta);
  const double C = delta * delta + 4.0 * R * R;
  std::normal_distribution<double> normal;
  for (int t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(t));
    const int d = 1 + t % 3;
    const double scale = R + delta;
    Vector x1(d), x2(d), y(d);
    for (int i = 0; i < d; ++i) {
      x1[i] = scale * normal(rng);
      x2[i] = scale * normal(rng);
      y[i] = scale * normal(rng);
    }
    if (t == 0) y = x1 + x2;
    auto phi = [&](const Vector& y1) { return a * (x1 - y1).squaredNorm() + b * (x2 - y + y1).squaredNorm(); };
    Vector y1 = Vector::Zero(d);
    for (int it = 0; it < 5; ++it) {
      const Vector grad = -2.0 * a * (x1 - y1) + 2.0 * b * (x2 - y + y1);
      const Vector step = grad / (2.0 * (a + b));
      y1 -= step;
      if (step.norm() <= 1e-15 * std::max(1.0, y1.norm())) break;
    }
    const Vector r = x1 + x2 - y;
    const double rhs = r.squaredNorm() / (4.0 * C);
    const double err = std::abs(phi(y1) - rhs) / std::max(1.0, rhs);
    rep.max_abs_error = std::max(rep.max_abs_error, err);
    // Residual split: x1 - y1 : x2 - y2 = 16 R^2 : 4 delta^2.
    const Vector s1 = x1 - y1;
    const Vector s1_expected = r * (16.0 * R * R / (16.0 * R * R + 4.0 * delta * delta));
    const double split = (s1 - s1_expected).norm() / std::max(1.0, r.norm());
    rep.max_split_error = std::max(rep.max_split_error, split);
  }
  rep.passed = rep.max_abs_error <= 1e-9 && rep.max_split_error <= 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------
// Sweep

std::string measure_digest(const SmoothedMeasure& sm) {
  std::ostringstream os;
  write_measure(os, sm);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

struct SweepCell {
  int d = 0;
  std::string kind;
  std::uint64_t seed = 0;
  int N = 0;
};

Matrix simplex_vertices(int d, double R) {
  if (d == 1) {
    Matrix X(1, 2);
    X << R, -R;
    return X;
  }
  // Centered standard basis of R^{d+1}, expressed in an orthonormal basis of
  // the hyperplane sum = 0.
  const int m = d + 1;
  const Matrix P = Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(P);
  const Matrix basis = es.eigenvectors().rightCols(d);  // eigenvalue 1
  Matrix X = basis.transpose() * P;
  for (int j = 0; j < m; ++j) X.col(j) *= R / X.col(j).norm();
  return X;
}

BallMeasure cell_measure(const SweepCell& c, double R) {
  const int d = c.d;
  if (c.kind == "point") return BallMeasure::point_mass(d);
  if (c.kind == "two-point") {
    Matrix X = Matrix::Zero(d, 2);
    X(0, 0) = R;
    X(0, 1) = -R;
    return BallMeasure::uniform(X, R);
  }
  if (c.kind == "simplex") return BallMeasure::uniform(simplex_vertices(d, R), R);

  Rng rng = make_rng(c.seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Matrix X(d, c.N);
  for (int j = 0; j < c.N; ++j) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v[i] = normal(rng);
    double r = R;
    if (c.kind == "random") r = R * std::pow(unif(rng), 1.0 / d);
    X.col(j) = v * (r / v.norm());
  }
  if (c.kind == "sphere") return BallMeasure::uniform(X, R);
  Vector w(c.N);
  for (int j = 0; j < c.N; ++j) w[j] = -std::log(1.0 - unif(rng));  // flat Dirichlet
  w /= w.sum();
  return BallMeasure(X, w, R);
}

std::vector<SweepRecord> run_cell(const SweepCell& c, double R, double delta, const SweepOptions& opts) {
  std::vector<SweepRecord> out;
  SweepRecord base;
  base.d = c.d;
  base.seed = c.seed;
  base.measure = c.kind;
  try {
    const SmoothedMeasure sm(cell_measure(c, R), delta);
    base.N = sm.base().size();
    base.digest = measure_digest(sm);

    const double lsi = estimate_lsi_expfamily(sm).estimate;
    const BoundReport dim1 = bound_lsi_dim1(delta, R);
    const BoundReport poin = bound_poincare(delta, R);
    auto emit = [&](const std::string& estimator, double est, const BoundReport& cand) {
      SweepRecord r = base;
      r.estimator = estimator;
      r.estimate = est;
      r.candidate = cand.name;
      r.candidate_bound = *cand.value;
      r.ratio = est / *cand.value;
      r.flag = est > 2.0 * *cand.value ? "investigate" : "ok";
      out.push_back(r);
    };
    emit("lsi-expfamily", lsi, dim1);
    emit("lsi-expfamily", lsi, poin);
    if (opts.poincare && c.d <= 2) {
      const GridDomain g = GridDomain::default_for(sm, c.d == 1 ? opts.grid_nodes_1d : opts.grid_nodes_2d);
      emit("poincare-grid", estimate_poincare(sm, g).constant_estimate, poin);
    }
  } catch (const std::exception& e) {
    out.clear();
    SweepRecord r = base;
    r.estimator = "lsi-expfamily";
    r.flag = "skipped";
    r.reason = e.what();
    out.push_back(r);
  }
  return out;
}

}  // namespace

std::vector<SweepRecord> conjecture_sweep(const std::vector<int>& d_list, const std::function<int(int)>& N_of_d,
                                          double R, double delta, int per_d_trials, std::uint64_t seed,
                                          const SweepOptions& opts) {
  require(!d_list.empty(), "sweep needs at least one dimension");
  require(R >= 0.0 && std::isfinite(R), "R must be finite and nonnegative");
  require(delta > 0.0 && std::isfinite(delta), "delta must be positive");
  require(per_d_trials >= 0, "per-dimension trial count must be nonnegative");

  std::vector<SweepCell> cells;
  for (int d : d_list) {
    require(d >= 1, "sweep dimensions must be at least 1");
    const int N = N_of_d(d);
    require(N >= 1, "N schedule must give at least one atom");
    const std::uint64_t dseed = derive_seed(seed, static_cast<std::uint64_t>(d));
    cells.push_back({d, "point", dseed, 1});
    if (R > 0.0) {
      cells.push_back({d, "two-point", dseed, 2});
      cells.push_back({d, "simplex", dseed, d + 1});
      cells.push_back({d, "sphere", derive_seed(dseed, 1), N});
      for (int t = 0; t < per_d_trials; ++t)
        cells.push_back({d, "random", derive_seed(dseed, 2 + static_cast<std::uint64_t>(t)), N});
    }
  }

  std::vector<std::vector<SweepRecord>> results(cells.size());
  const auto ncells = static_cast<std::ptrdiff_t>(cells.size());
#ifdef LSICERT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::ptrdiff_t i = 0; i < ncells; ++i) results[i] = run_cell(cells[i], R, delta, opts);

  std::vector<SweepRecord> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace lsicert
