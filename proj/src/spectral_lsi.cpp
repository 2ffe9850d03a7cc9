#include "lsicert/kernels.hpp"
#include "lsicert/rng.hpp"
#include "lsicert/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <random>

namespace lsicert {

double expfamily_ratio(const SmoothedMeasure& sm, const Vector& theta) {
  require(theta.size() == sm.dimension(), "theta has the wrong dimension");
  const double t2 = theta.squaredNorm();
  require(t2 > 0.0, "theta = 0 is excluded");
  const BallMeasure& mu = sm.base();
  const Vector s = mu.atoms().transpose() * theta;
  const Vector& w = mu.weights();
  const double center = w.dot(s);
  Vector lv = mu.log_weights();
  for (Eigen::Index i = 0; i < lv.size(); ++i) lv[i] += s[i] - center;
  const double lse = log_sum_exp(lv);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < lv.size(); ++i) {
    if (!std::isfinite(lv[i])) continue;
    const double lp = lv[i] - lse;
    kl += std::exp(lp) * (s[i] - center - lse);
  }
  kl = std::max(kl, 0.0);
  const double d2 = sm.delta() * sm.delta();
  return 2.0 * d2 + 4.0 * kl / t2;
}

double expfamily_ratio_grid(const SmoothedMeasure& sm, const Vector& theta, const GridDomain& grid,
                            double tail_tolerance) {
  require(theta.size() == sm.dimension(), "theta has the wrong dimension");
  require(grid.dimension() == sm.dimension(), "grid and measure dimensions differ");
  const double t2 = theta.squaredNorm();
  require(t2 > 0.0, "theta = 0 is excluded");
  const Matrix nodes = grid.nodes();
  const Vector lp = kernels::log_density_points(sm, nodes);
  const Vector tz = nodes.transpose() * theta;
  const double hd = grid.dimension() * std::log(grid.spacing());

  // Tilted mass on the grid against its exact value delta^2|theta|^2/2 + log M(theta).
  Vector lt = lp + tz;
  const double log_z_grid = log_sum_exp(lt) + hd;
  Vector lm = sm.base().log_weights() + sm.base().atoms().transpose() * theta;
  const double log_z_exact = 0.5 * sm.delta() * sm.delta() * t2 + log_sum_exp(lm);
  const double missing = std::abs(std::expm1(log_z_grid - log_z_exact));
  const double base_missing = std::abs(std::expm1(log_sum_exp(lp) + hd));
  const double err = std::max(missing, base_missing);
  if (err > tail_tolerance) {
    throw SolverError("grid misses tilted mass " + format_double(err) + "; enlarge the grid", err);
  }

  // KL(q | nu) with nu the normalized grid masses and q proportional to nu f^2.
  const double lse_p = log_sum_exp(lp);
  const double lse_t = log_sum_exp(lt);
  double kl = 0.0;
  for (Eigen::Index k = 0; k < lt.size(); ++k) {
    const double lq = lt[k] - lse_t;
    const double lnu = lp[k] - lse_p;
    if (std::isfinite(lq)) kl += std::exp(lq) * (lq - lnu);
  }
  return std::max(kl, 0.0) / (0.25 * t2);
}

std::vector<Vector> default_theta_grid(const SmoothedMeasure& sm, int magnitudes) {
  require(magnitudes >= 2, "need at least two magnitudes");
  const int d = sm.dimension();
  const BallMeasure& mu = sm.base();
  std::vector<Vector> dirs;
  auto add_dir = [&](Vector v) {
    const double n = v.norm();
    if (n > 0.0) {
      dirs.push_back(v / n);
      dirs.push_back(-v / n);
    }
  };
  if (d == 2) {
    constexpr int kAngles = 24;
    for (int a = 0; a < kAngles; ++a) {
      const double phi = 2.0 * M_PI * a / kAngles;
      dirs.push_back((Vector(2) << std::cos(phi), std::sin(phi)).finished());
    }
  } else {
    for (int i = 0; i < std::min(d, 16); ++i) add_dir(Vector::Unit(d, i));
  }
  if (d >= 3 || d == 1) {
    const Vector mean = mu.atoms() * mu.weights();
    Matrix cov = Matrix::Zero(d, d);
    for (int i = 0; i < mu.size(); ++i) {
      const Vector c = mu.atom(i) - mean;
      cov += mu.weights()[i] * c * c.transpose();
    }
    if (d >= 3) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
      add_dir(es.eigenvectors().col(d - 1));
      for (int i = 1; i < std::min(mu.size(), 9); ++i) add_dir(mu.atom(i) - mu.atom(0));
    }
  }
  const double lo = 1e-3 / (sm.radius() + sm.delta());
  const double hi = 1e2 / sm.delta();
  std::vector<Vector> out;
  out.reserve(dirs.size() * static_cast<std::size_t>(magnitudes));
  for (const Vector& u : dirs) {
    for (int k = 0; k < magnitudes; ++k) {
      const double t = lo * std::pow(hi / lo, static_cast<double>(k) / (magnitudes - 1));
      out.push_back(t * u);
    }
  }
  return out;
}

ExpFamilyResult estimate_lsi_expfamily(const SmoothedMeasure& sm, const std::vector<Vector>& thetas) {
  ExpFamilyResult res;
  res.ratios.reserve(thetas.size());
  bool any = false;
  for (const Vector& th : thetas) {
    require(th.size() == sm.dimension(), "theta has the wrong dimension");
    require(th.allFinite(), "theta must be finite");
    if (th.squaredNorm() == 0.0) {
      res.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double r = expfamily_ratio(sm, th);
    res.ratios.push_back(r);
    if (!any || r > res.estimate) {
      res.estimate = r;
      res.theta = th;
      any = true;
    }
  }
  require(any, "theta grid has no nonzero member");
  return res;
}

ExpFamilyResult estimate_lsi_expfamily(const SmoothedMeasure& sm) {
  return estimate_lsi_expfamily(sm, default_theta_grid(sm));
}

double grid_lsi_ratio(const GridForm& form, const Vector& f) {
  const double e = dirichlet_energy(form, f);
  if (!(e > 0.0)) return 0.0;
  return weighted_entropy(form.mass, f.array().square().matrix()) / e;
}

namespace {

// (L + s M)^{-1}: tridiagonal elimination in 1D, sparse LDLT in 2D.
class Preconditioner {
 public:
  Preconditioner(const GridForm& form, double shift) : form_(form), shift_(shift) {
    const Eigen::Index n = form.mass.size();
    if (form.grid.dimension() == 1) {
      diag_ = shift * form.mass;
      for (Eigen::Index k = 0; k + 1 < n; ++k) {
        diag_[k] += form.edge_weight[k];
        diag_[k + 1] += form.edge_weight[k];
      }
      return;
    }
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < n; ++k) trip.emplace_back(k, k, shift * form.mass[k]);
    for (std::size_t e = 0; e < form.edges.size(); ++e) {
      const auto [a, b] = form.edges[e];
      const double w = form.edge_weight[static_cast<Eigen::Index>(e)];
      trip.emplace_back(a, a, w);
      trip.emplace_back(b, b, w);
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success) throw SolverError("preconditioner factorization failed", 0.0);
  }

  Vector apply(const Vector& g) const {
    if (form_.grid.dimension() == 2) return ldlt_.solve(g);
    const Eigen::Index n = g.size();
    const Vector& w = form_.edge_weight;
    Vector c(n), x(n);
    std::vector<double> cp(static_cast<std::size_t>(n));
    double denom = diag_[0];
    cp[0] = n > 1 ? -w[0] / denom : 0.0;
    c[0] = g[0] / denom;
    for (Eigen::Index k = 1; k < n; ++k) {
      denom = diag_[k] + w[k - 1] * cp[static_cast<std::size_t>(k - 1)];
      cp[static_cast<std::size_t>(k)] = k + 1 < n ? -w[k] / denom : 0.0;
      c[k] = (g[k] + w[k - 1] * c[k - 1]) / denom;
    }
    x[n - 1] = c[n - 1];
    for (Eigen::Index k = n - 2; k >= 0; --k) x[k] = c[k] - cp[static_cast<std::size_t>(k)] * x[k + 1];
    return x;
  }

 private:
  const GridForm& form_;
  double shift_;
  Vector diag_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

struct Ascent {
  Vector f;
  double ratio = 0.0;
  int iterations = 0;
  bool failed = false;
};

void normalize(const Vector& m, Vector& f) {
  const double z = (m.array() * f.array().square()).sum();
  if (z > 0.0) f /= std::sqrt(z);
}

Ascent ascend(const GridForm& form, const Preconditioner& P, Vector f, int iterations) {
  const Vector& m = form.mass;
  f = f.cwiseAbs();
  normalize(m, f);
  Ascent out;
  double r = grid_lsi_ratio(form, f);
  double t = -1.0;
  int flat = 0, it = 0;
  for (; it < iterations; ++it) {
    const double e = dirichlet_energy(form, f);
    const double z = (m.array() * f.array().square()).sum();
    Vector grad(f.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) {
      const double f2 = f[k] * f[k];
      grad[k] = f2 > 0.0 ? 2.0 * m[k] * f[k] * std::log(f2 / z) : 0.0;
    }
    grad -= 2.0 * r * apply_laplacian(form, f);
    grad /= e;
    const Vector dir = P.apply(grad);
    const double slope = grad.dot(dir);
    if (!(slope > 0.0)) break;
    const double dnorm = std::sqrt((m.array() * dir.array().square()).sum());
    t = t < 0.0 ? 0.1 / dnorm : 4.0 * t;

    bool accepted = false, converged = false;
    Vector fn;
    double rn = r;
    for (int ls = 0; ls < 80; ++ls) {
      fn = (f + t * dir).cwiseAbs();
      normalize(m, fn);
      rn = grid_lsi_ratio(form, fn);
      if (rn > r) {
        accepted = true;
        break;
      }
      if (t * slope < 1e-15 * r) {
        converged = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.failed = !converged;
      break;
    }
    flat = (rn - r <= 1e-13 * r) ? flat + 1 : 0;
    f = std::move(fn);
    r = rn;
    if (flat >= 3) break;
  }
  out.f = std::move(f);
  out.ratio = r;
  out.iterations = it;
  return out;
}

}  // namespace

GridLsiResult estimate_lsi_grid(const SmoothedMeasure& sm, const GridDomain& grid, int iterations,
                                std::uint64_t seed) {
  require(sm.dimension() <= 2, "grid estimators support d <= 2");
  require(iterations >= 0, "iteration count must be nonnegative");
  if (!grid.covers(sm)) throw InputError(grid.sizing_hint(sm));
  const GridForm form = build_grid_form(sm, grid);
  const Matrix nodes = grid.nodes();
  const Eigen::Index n = form.mass.size();

  const RayleighResult poincare = estimate_poincare(form);
  const Preconditioner P(form, poincare.eigenvalue);

  std::vector<std::pair<std::string, Vector>> starts;
  const ExpFamilyResult ef = estimate_lsi_expfamily(sm);
  {
    Vector lf = 0.5 * (nodes.transpose() * ef.theta);
    lf.array() -= lf.maxCoeff();
    starts.emplace_back("expfamily", lf.array().exp().matrix());
  }
  {
    const Vector& phi = poincare.maximizer;
    starts.emplace_back("poincare", (Vector::Ones(n) + 1e-2 * phi / phi.cwiseAbs().maxCoeff()).eval());
  }
  {
    Rng rng = make_rng(seed, 0);
    std::uniform_real_distribution<double> amp(-0.2, 0.2), freq(0.2, 2.0), phase(0.0, 2.0 * M_PI);
    const double scale = sm.radius() + sm.delta();
    Vector f = Vector::Ones(n);
    for (int j = 0; j < 4; ++j) {
      Vector k(sm.dimension());
      for (int i = 0; i < sm.dimension(); ++i) k[i] = freq(rng) / scale;
      const double a = amp(rng), ph = phase(rng);
      f.array() += a * ((nodes.transpose() * k).array() + ph).sin();
    }
    starts.emplace_back("random", f);
  }

  GridLsiResult res;
  bool first = true;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const Ascent a = ascend(form, P, starts[s].second, iterations);
    if (s == 0) {
      Vector f0 = starts[0].second;
      res.expfamily_start = grid_lsi_ratio(form, f0);
    }
    if (a.failed) {
      res.warning = true;
      if (!res.warning_message.empty()) res.warning_message += "; ";
      res.warning_message += "line search failed from the " + starts[s].first + " start";
    }
    if (first || a.ratio > res.estimate) {
      res.estimate = a.ratio;
      res.maximizer = a.f;
      res.iterations = a.iterations;
      res.start = starts[s].first;
      first = false;
    }
  }
  return res;
}

}  // namespace lsicert
