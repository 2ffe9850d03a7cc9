#include "lsicert/kernels.hpp"
#include "lsicert/rng.hpp"
#include "lsicert/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <random>

namespace lsicert {

double chi2_gaussians(const Vector& x, const Vector& y, double delta) {
  require(x.size() == y.size(), "chi2 arguments must have the same dimension");
  require(delta > 0.0, "delta must be positive");
  return std::expm1((x - y).squaredNorm() / (delta * delta));
}

namespace {

// Per-atom normalized Gaussian masses on the grid (N x nodes) and the largest
// Gaussian mass the grid misses.
struct AtomMasses {
  Matrix g;
  double tail = 0.0;
};

AtomMasses atom_masses(const SmoothedMeasure& sm, const GridDomain& grid) {
  require(grid.dimension() == sm.dimension(), "grid and measure dimensions differ");
  const Matrix nodes = grid.nodes();
  const BallMeasure& mu = sm.base();
  const double d2 = sm.delta() * sm.delta();
  const double log_norm = grid.dimension() * (std::log(grid.spacing()) - 0.5 * std::log(2.0 * M_PI * d2));
  AtomMasses out;
  out.g.resize(mu.size(), nodes.cols());
  for (int i = 0; i < mu.size(); ++i) {
    Vector lg(nodes.cols());
    for (Eigen::Index k = 0; k < nodes.cols(); ++k) lg[k] = -(nodes.col(k) - mu.atom(i)).squaredNorm() / (2.0 * d2);
    const double lse = log_sum_exp(lg);
    out.tail = std::max(out.tail, std::abs(std::expm1(lse + log_norm)));
    out.g.row(i) = (lg.array() - lse).exp().matrix().transpose();
  }
  return out;
}

DecompositionResult finish(DecompositionResult r, double tail) {
  r.residual = std::abs(r.inner + r.outer - r.total);
  r.tail_mass = tail;
  r.tail_warning = tail > 1e-8;
  return r;
}

}  // namespace

DecompositionResult variance_decomposition(const SmoothedMeasure& sm, const Vector& f,
                                           const GridDomain& grid) {
  require(f.size() == grid.size(), "grid function has the wrong size");
  const AtomMasses am = atom_masses(sm, grid);
  const Vector& w = sm.base().weights();
  const Eigen::Index N = am.g.rows();
  Vector means(N);
  DecompositionResult r;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vector gi = am.g.row(i).transpose();
    means[i] = gi.dot(f);
    r.inner += w[i] * weighted_variance(gi, f);
  }
  r.outer = weighted_variance(w, means);
  const Vector rho = am.g.transpose() * w;
  r.total = weighted_variance(rho, f);
  return finish(r, am.tail);
}

DecompositionResult entropy_decomposition(const SmoothedMeasure& sm, const Vector& f,
                                          const GridDomain& grid) {
  require(f.size() == grid.size(), "grid function has the wrong size");
  const AtomMasses am = atom_masses(sm, grid);
  const Vector& w = sm.base().weights();
  const Vector F = f.array().square().matrix();
  const Eigen::Index N = am.g.rows();
  Vector means(N);
  DecompositionResult r;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Vector gi = am.g.row(i).transpose();
    means[i] = gi.dot(F);
    r.inner += w[i] * weighted_entropy(gi, F);
  }
  r.outer = weighted_entropy(w, means);
  const Vector rho = am.g.transpose() * w;
  r.total = weighted_entropy(rho, F);
  return finish(r, am.tail);
}

// ---------------------------------------------------------------------------

namespace {

// Integral over [0, upper] of an integrand concentrated near 0 on the scale
// `scale`, split at geometrically growing breakpoints.
template <class F>
double integrate_peaked(F f, double upper, double scale, double* err) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0, a = 0.0, b = scale;
  while (a < upper) {
    b = std::min(b, upper);
    double e = 0.0;
    total += gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13, &e);
    *err += e;
    if (f(b) == 0.0 && b > 8.0 * scale) break;
    a = b;
    b *= 4.0;
  }
  return total;
}

}  // namespace

double muckenhoupt_product(double y) {
  require(y >= 0.0 && std::isfinite(y), "y must be finite and nonnegative");
  double err = 0.0;
  const double scale = 1.0 / std::max(y, 1.0);
  // e^{y^2/2} int_y^inf e^{-u^2/2} du with u = y + t.
  const double tail = integrate_peaked([y](double t) { return std::exp(-y * t - 0.5 * t * t); },
                                       std::numeric_limits<double>::infinity(), scale, &err);
  if (y == 0.0) return 0.0;
  // e^{-y^2/2} int_0^y (1 + u^2) e^{u^2/2} du with u = y - s.
  const double head = integrate_peaked(
      [y](double s) {
        const double u = y - s;
        return (1.0 + u * u) * std::exp(-s * (y - 0.5 * s));
      },
      y, scale, &err);
  return tail * head;
}

MuckenhouptResult muckenhoupt_constant(double tolerance) {
  require(tolerance > 0.0, "tolerance must be positive");
  constexpr int kMaxWidenings = 20;
  MuckenhouptResult res;
  double window = 10.0;
  double prev = -1.0;
  for (int w = 0; w <= kMaxWidenings; ++w) {
    const auto [arg, neg] = boost::math::tools::brent_find_minima(
        [](double y) { return -muckenhoupt_product(y); }, 0.0, window, 50);
    const double value = -neg;
    res.value = value;
    res.argmax = arg;
    res.window = window;
    res.widenings = w;
    res.at_boundary = arg >= window * (1.0 - 1e-4);
    if (!res.at_boundary) {
      res.error_estimate = 1e-12;
      return res;
    }
    // The maximizer is on the edge: accept once widening no longer moves the value.
    if (prev >= 0.0 && std::abs(value - prev) <= tolerance) {
      res.error_estimate = std::abs(value - prev);
      return res;
    }
    prev = value;
    window *= 2.0;
  }
  throw SolverError("Muckenhoupt supremum did not stabilize under window widening",
                    std::abs(res.value - prev));
}

// ---------------------------------------------------------------------------

TestFunction linear_test_function(const Vector& a) {
  TestFunction t;
  t.name = "linear";
  t.value = [a](const Vector& u) { return a.dot(u); };
  t.gradient = [a](const Vector&) { return a; };
  return t;
}

TestFunction cubic_test_function(int d, int axis) {
  require(axis >= 0 && axis < d, "axis out of range");
  TestFunction t;
  t.name = "cubic" + std::to_string(axis);
  t.value = [axis](const Vector& u) { return u[axis] * u[axis] * u[axis]; };
  t.gradient = [d, axis](const Vector& u) {
    Vector g = Vector::Zero(d);
    g[axis] = 3.0 * u[axis] * u[axis];
    return g;
  };
  return t;
}

TestFunction random_test_function(int d, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> freq(0.3, 3.0), phase(0.0, 2.0 * M_PI);
  Vector a(d), b(d), c(d), e(d), k(d), ph(d);
  for (int i = 0; i < d; ++i) {
    a[i] = normal(rng);
    b[i] = 0.5 * normal(rng);
    c[i] = 0.2 * normal(rng);
    e[i] = normal(rng);
    k[i] = freq(rng);
    ph[i] = phase(rng);
  }
  const double cross = d >= 2 ? 0.5 * normal(rng) : 0.0;
  TestFunction t;
  t.name = "random" + std::to_string(seed);
  t.value = [=](const Vector& u) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      s += a[i] * u[i] + b[i] * u[i] * u[i] + c[i] * u[i] * u[i] * u[i] + e[i] * std::sin(k[i] * u[i] + ph[i]);
    if (d >= 2) s += cross * u[0] * u[1];
    return s;
  };
  t.gradient = [=](const Vector& u) {
    Vector g(d);
    for (int i = 0; i < d; ++i)
      g[i] = a[i] + 2.0 * b[i] * u[i] + 3.0 * c[i] * u[i] * u[i] + e[i] * k[i] * std::cos(k[i] * u[i] + ph[i]);
    if (d >= 2) {
      g[0] += cross * u[1];
      g[1] += cross * u[0];
    }
    return g;
  };
  return t;
}

double weighted_poincare_ratio(const GridForm& form, const TestFunction& f) {
  const Eigen::Index n = form.mass.size();
  Vector vals(n);
  double energy = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vector u = form.grid.node(k);
    vals[k] = f.value(u);
    const Vector g = f.gradient(u);
    double s = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) s += g[i] * g[i] / (1.0 + u[i] * u[i]);
    energy += form.mass[k] * s;
  }
  require(energy > 0.0, "test function has zero weighted energy");
  return weighted_variance(form.mass, vals) / energy;
}

WeightedPoincareReport weighted_poincare_check(const SmoothedMeasure& sm, const GridDomain& grid,
                                               int trials, std::uint64_t seed) {
  require(sm.dimension() <= 2, "grid estimators support d <= 2");
  require(trials >= 2, "need at least two test functions");
  if (!grid.covers(sm)) throw InputError(grid.sizing_hint(sm));
  const SmoothedMeasure unit = rescale(sm, sm.delta());
  const GridForm form = build_grid_form(unit, grid.scaled(sm.delta()));
  const int d = sm.dimension();

  WeightedPoincareReport rep;
  rep.radius = unit.radius();
  const MuckenhouptResult mc = muckenhoupt_constant();
  rep.hardy_constant = 4.0 * (mc.value + mc.error_estimate);
  const double R2 = rep.radius * rep.radius;
  rep.bound = 2.0 * rep.hardy_constant * (1.0 + R2) * std::exp(4.0 * R2);

  for (int t = 0; t < trials; ++t) {
    TestFunction f = t == 0   ? linear_test_function(Vector::Unit(d, 0))
                     : t == 1 ? cubic_test_function(d, 0)
                              : random_test_function(d, derive_seed(seed, static_cast<std::uint64_t>(t)));
    const double r = weighted_poincare_ratio(form, f);
    rep.ratios.push_back(r);
    if (r > rep.worst_ratio) {
      rep.worst_ratio = r;
      rep.worst_function = f.name;
    }
  }
  rep.passed = rep.worst_ratio <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------

LyapunovFunction exp_quadratic(double s) {
  require(s >= 0.0, "s must be nonnegative");
  return {"exp(" + format_double(s) + "|x|^2)", [s](const Vector& x) { return std::exp(s * x.squaredNorm()); }};
}

LyapunovReport lyapunov_check(const SmoothedMeasure& sm, const LyapunovFunction& W, double b,
                              double c, const GridDomain& grid, double tolerance) {
  require(b > 0.0 && c > 0.0, "b and c must be positive");
  require(grid.dimension() == sm.dimension(), "grid and measure dimensions differ");
  const int d = grid.dimension();
  const int n = grid.nodes_per_axis();
  const double h = grid.spacing();
  LyapunovReport rep;
  rep.function = W.name;
  rep.b = b;
  rep.c = c;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  std::size_t bad = 0;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Vector x = grid.node(k);
    const double w0 = W.value(x);
    if (!(w0 >= 1.0)) throw InputError("Lyapunov function must be >= 1 on the grid");
    const int i = static_cast<int>(k % n);
    const int j = d == 2 ? static_cast<int>(k / n) : 1;
    if (i == 0 || i == n - 1 || j == 0 || j == n - 1) continue;
    double lap = 0.0;
    Vector gw(d);
    for (int a = 0; a < d; ++a) {
      Vector xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double wp = W.value(xp), wm = W.value(xm);
      lap += (wp - 2.0 * w0 + wm) / (h * h);
      gw[a] = (wp - wm) / (2.0 * h);
    }
    const double lw = (lap - sm.grad_potential(x).dot(gw)) / w0;
    const double v = lw - (b - c * x.squaredNorm());
    rep.max_violation = std::max(rep.max_violation, v);
    ++rep.nodes;
    if (v > tolerance) ++bad;
  }
  rep.violating_fraction = rep.nodes ? static_cast<double>(bad) / static_cast<double>(rep.nodes) : 0.0;
  rep.passed = bad == 0;
  return rep;
}

LyapunovSearch lyapunov_search(const SmoothedMeasure& sm, double b, double c, const GridDomain& grid,
                               const std::vector<double>& s_values) {
  require(!s_values.empty(), "need at least one s value");
  LyapunovSearch out;
  bool first = true;
  for (double s : s_values) {
    const LyapunovReport r = lyapunov_check(sm, exp_quadratic(s), b, c, grid);
    out.scan.emplace_back(s, r.max_violation);
    if (first || r.max_violation < out.best.max_violation) {
      out.best = r;
      out.best_s = s;
      first = false;
    }
  }
  out.admissible_found = out.best.passed;
  return out;
}

}  // namespace lsicert
