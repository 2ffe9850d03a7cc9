#include "lsicert/kernels.hpp"
#include "lsicert/rng.hpp"
#include "lsicert/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <random>

namespace lsicert {

namespace {

constexpr double kLogWeightFloor = -600.0;

}  // namespace

GridForm build_grid_form(const SmoothedMeasure& sm, const GridDomain& grid) {
  require(sm.dimension() == grid.dimension(), "grid and measure dimensions differ");
  GridForm form;
  form.grid = grid;
  form.log_density = kernels::log_density_points(sm, grid.nodes());
  const double lse = log_sum_exp(form.log_density);
  const double h = grid.spacing();
  form.log_grid_mass = lse + grid.dimension() * std::log(h);
  form.mass = (form.log_density.array() - lse).exp().matrix();

  const int n = grid.nodes_per_axis();
  if (grid.dimension() == 1) {
    for (int i = 0; i + 1 < n; ++i) form.edges.push_back({i, i + 1});
  } else {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i + 1 < n; ++i) form.edges.push_back({i + Eigen::Index(n) * j, i + 1 + Eigen::Index(n) * j});
    for (int j = 0; j + 1 < n; ++j)
      for (int i = 0; i < n; ++i) form.edges.push_back({i + Eigen::Index(n) * j, i + Eigen::Index(n) * (j + 1)});
  }
  const auto ne = static_cast<Eigen::Index>(form.edges.size());
  Matrix mid(grid.dimension(), ne);
  for (Eigen::Index e = 0; e < ne; ++e) {
    mid.col(e) = 0.5 * (grid.node(form.edges[e].a) + grid.node(form.edges[e].b));
  }
  const Vector lp_mid = kernels::log_density_points(sm, mid);
  const double lp_max = form.log_density.maxCoeff();
  form.edge_weight.resize(ne);
  for (Eigen::Index e = 0; e < ne; ++e) {
    const double lp = std::max(lp_mid[e], lp_max + kLogWeightFloor);
    form.edge_weight[e] = std::exp(lp - lse - 2.0 * std::log(h));
  }
  return form;
}

double dirichlet_energy(const GridForm& form, const Vector& f) {
  double s = 0.0;
  for (std::size_t e = 0; e < form.edges.size(); ++e) {
    const double df = f[form.edges[e].a] - f[form.edges[e].b];
    s += form.edge_weight[static_cast<Eigen::Index>(e)] * df * df;
  }
  return s;
}

Vector apply_laplacian(const GridForm& form, const Vector& f) {
  Vector out = Vector::Zero(f.size());
  for (std::size_t e = 0; e < form.edges.size(); ++e) {
    const auto [a, b] = form.edges[e];
    const double flux = form.edge_weight[static_cast<Eigen::Index>(e)] * (f[a] - f[b]);
    out[a] += flux;
    out[b] -= flux;
  }
  return out;
}

double weighted_mean(const Vector& mass, const Vector& f) { return mass.dot(f) / mass.sum(); }

double weighted_variance(const Vector& mass, const Vector& f) {
  const double mu = weighted_mean(mass, f);
  return (mass.array() * (f.array() - mu).square()).sum() / mass.sum();
}

double weighted_entropy(const Vector& mass, const Vector& g) {
  const double total = mass.sum();
  const double z = mass.dot(g) / total;
  if (z <= 0.0) return 0.0;
  // sum m g log(g / z) keeps the terms of both signs on the same scale.
  double s = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (g[k] > 0.0 && mass[k] > 0.0) s += mass[k] * g[k] * std::log(g[k] / z);
  }
  return s / total;
}

namespace {

// Solves L f = r for r orthogonal to constants. The node with the largest
// mass is grounded (f = 0 there).
class LaplacianSolver {
 public:
  explicit LaplacianSolver(const GridForm& form) : form_(form) {
    form.mass.maxCoeff(&ground_);
    if (form.grid.dimension() == 2) factor_grounded();
  }

  Vector solve(const Vector& r) const {
    return form_.grid.dimension() == 1 ? solve_path(r) : solve_grounded(r);
  }

 private:
  // Path graph: the flux through edge k equals the sum of r on either side.
  // The side not containing the grounded node is used so tail sums stay exact.
  Vector solve_path(const Vector& r) const {
    const Eigen::Index n = r.size();
    const Vector& w = form_.edge_weight;
    Vector f(n);
    f[ground_] = 0.0;
    double prefix = 0.0;
    std::vector<double> pre(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < ground_; ++k) {
      prefix += r[k];
      pre[static_cast<std::size_t>(k)] = prefix;
    }
    for (Eigen::Index k = ground_ - 1; k >= 0; --k) f[k] = f[k + 1] + pre[static_cast<std::size_t>(k)] / w[k];
    double suffix = 0.0;
    std::vector<double> suf(static_cast<std::size_t>(n + 1), 0.0);
    for (Eigen::Index k = n - 1; k > ground_; --k) {
      suffix += r[k];
      suf[static_cast<std::size_t>(k)] = suffix;
    }
    for (Eigen::Index k = ground_; k + 1 < n; ++k) f[k + 1] = f[k] + suf[static_cast<std::size_t>(k + 1)] / w[k];
    return f;
  }

  void factor_grounded() {
    const Eigen::Index n = form_.mass.size();
    auto red = [&](Eigen::Index k) { return k < ground_ ? k : k - 1; };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(form_.edges.size() * 4);
    for (std::size_t e = 0; e < form_.edges.size(); ++e) {
      const auto [a, b] = form_.edges[e];
      const double w = form_.edge_weight[static_cast<Eigen::Index>(e)];
      if (a != ground_) trip.emplace_back(red(a), red(a), w);
      if (b != ground_) trip.emplace_back(red(b), red(b), w);
      if (a != ground_ && b != ground_) {
        trip.emplace_back(red(a), red(b), -w);
        trip.emplace_back(red(b), red(a), -w);
      }
    }
    Eigen::SparseMatrix<double> A(n - 1, n - 1);
    A.setFromTriplets(trip.begin(), trip.end());
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success) throw SolverError("grounded Laplacian factorization failed", 0.0);
  }

  Vector solve_grounded(const Vector& r) const {
    const Eigen::Index n = r.size();
    Vector rr(n - 1);
    rr.head(ground_) = r.head(ground_);
    rr.tail(n - 1 - ground_) = r.tail(n - 1 - ground_);
    const Vector x = ldlt_.solve(rr);
    Vector f(n);
    f.head(ground_) = x.head(ground_);
    f[ground_] = 0.0;
    f.tail(n - 1 - ground_) = x.tail(n - 1 - ground_);
    return f;
  }

  const GridForm& form_;
  Eigen::Index ground_ = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

double m_dot(const Vector& m, const Vector& a, const Vector& b) {
  return (m.array() * a.array() * b.array()).sum();
}

// M-orthonormalizes the columns of X against constants and each other.
void m_orthonormalize(const Vector& m, Matrix& X, Rng& rng) {
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = std::sqrt(m_dot(m, X.col(c), X.col(c)));
      for (int pass = 0; pass < 2; ++pass) {
        X.col(c).array() -= m.dot(X.col(c));
        for (Eigen::Index p = 0; p < c; ++p) X.col(c) -= m_dot(m, X.col(p), X.col(c)) * X.col(p);
      }
      const double nrm = std::sqrt(m_dot(m, X.col(c), X.col(c)));
      if (nrm > 1e-10 * before && nrm > 0.0) {
        X.col(c) /= nrm;
        break;
      }
      for (Eigen::Index k = 0; k < X.rows(); ++k) X(k, c) = normal(rng);
    }
  }
}

}  // namespace

RayleighResult estimate_poincare(const SmoothedMeasure& sm, const GridDomain& grid,
                                 const EigenOptions& opts) {
  require(sm.dimension() <= 2, "grid estimators support d <= 2");
  if (!grid.covers(sm)) throw InputError(grid.sizing_hint(sm));
  return estimate_poincare(build_grid_form(sm, grid), opts);
}

RayleighResult estimate_poincare(const GridForm& form, const EigenOptions& opts) {
  require(opts.block >= 1, "block size must be positive");
  const Vector& m = form.mass;
  const Eigen::Index n = m.size();
  const Eigen::Index b = std::min<Eigen::Index>(opts.block, n - 1);
  LaplacianSolver solver(form);

  Rng rng = make_rng(0x9e3779b97f4a7c15ULL, 0);
  std::normal_distribution<double> normal;
  Matrix X(n, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    for (Eigen::Index k = 0; k < n; ++k) X(k, c) = normal(rng);
  }
  // Seed the first direction with the first coordinate so well-separated
  // modes are represented from the start.
  for (Eigen::Index k = 0; k < n; ++k) X(k, 0) = form.grid.node(k)[0];
  m_orthonormalize(m, X, rng);

  double lambda = 0.0, prev = -1.0, residual = 0.0;
  int it = 0, stable = 0;
  for (; it < opts.max_iterations; ++it) {
    Matrix Y(n, b);
    for (Eigen::Index c = 0; c < b; ++c) Y.col(c) = solver.solve((m.array() * X.col(c).array()).matrix());
    m_orthonormalize(m, Y, rng);
    Matrix LY(n, b);
    for (Eigen::Index c = 0; c < b; ++c) LY.col(c) = apply_laplacian(form, Y.col(c));
    Matrix A = Y.transpose() * LY;
    A = 0.5 * (A + A.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    X = Y * es.eigenvectors();
    lambda = es.eigenvalues()[0];

    const Vector x0 = X.col(0);
    const Vector r = apply_laplacian(form, x0) - lambda * (m.array() * x0.array()).matrix();
    const double scale = std::abs(lambda) * (m.array() * x0.array()).matrix().norm();
    residual = scale > 0.0 ? r.norm() / scale : r.norm();

    if (prev > 0.0 && std::abs(lambda - prev) <= opts.tolerance * std::abs(lambda)) {
      if (++stable >= 2) break;
    } else {
      stable = 0;
    }
    prev = lambda;
  }
  if (it == opts.max_iterations && residual > opts.max_residual) {
    throw SolverError("subspace iteration did not converge", residual);
  }

  RayleighResult res;
  res.maximizer = X.col(0);
  res.maximizer.array() -= weighted_mean(m, res.maximizer);
  // Rayleigh quotient from sums of nonnegative terms.
  res.eigenvalue = dirichlet_energy(form, res.maximizer) / weighted_variance(m, res.maximizer);
  if (!(res.eigenvalue > 0.0) || !std::isfinite(res.eigenvalue)) {
    throw SolverError("nonpositive spectral gap", residual);
  }
  res.constant_estimate = 1.0 / res.eigenvalue;
  res.residual = residual;
  res.grid_meta = form.grid;
  res.iterations = it + 1;
  return res;
}

}  // namespace lsicert
