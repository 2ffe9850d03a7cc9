#pragma once

#include "lsicert/common.hpp"
#include "lsicert/grid.hpp"
#include "lsicert/measure.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace lsicert {

// ---------------------------------------------------------------------------
// Discrete Dirichlet form on a grid

struct GridEdge {
  Eigen::Index a;
  Eigen::Index b;
};

/// Node masses m_k = p(z_k) / sum p and edge weights
/// w_e = p(midpoint) / (sum p * h^2), so that sum m f^2 approximates the
/// L^2(p) norm and sum_e w_e (f_a - f_b)^2 the Dirichlet energy.
struct GridForm {
  GridDomain grid;
  Vector log_density;  // log p at nodes
  Vector mass;         // sums to 1
  std::vector<GridEdge> edges;
  Vector edge_weight;
  double log_grid_mass = 0.0;  // log(sum_k p(z_k) h^d)
};

GridForm build_grid_form(const SmoothedMeasure& sm, const GridDomain& grid);

double dirichlet_energy(const GridForm& form, const Vector& f);
/// L f with (Lf)_k = sum over edges at k of w (f_k - f_other).
Vector apply_laplacian(const GridForm& form, const Vector& f);
double weighted_mean(const Vector& mass, const Vector& f);
double weighted_variance(const Vector& mass, const Vector& f);
/// Ent(g) = sum m g log g - (sum m g) log(sum m g) for g >= 0, with 0 log 0 = 0.
double weighted_entropy(const Vector& mass, const Vector& g);

// ---------------------------------------------------------------------------
// Poincare constant

struct RayleighResult {
  double constant_estimate = 0.0;
  double eigenvalue = 0.0;
  Vector maximizer;
  double residual = 0.0;
  GridDomain grid_meta;
  int iterations = 0;
};

struct EigenOptions {
  int block = 8;
  int max_iterations = 2000;
  double tolerance = 1e-11;      // relative change of the eigenvalue
  double max_residual = 1e-6;    // accepted residual when iterations run out
};

/// 1 / lambda_2 of the generalized problem L f = lambda M f on the grid.
/// The grid must cover B(0, R + 6 delta).
RayleighResult estimate_poincare(const SmoothedMeasure& sm, const GridDomain& grid,
                                 const EigenOptions& opts = {});
RayleighResult estimate_poincare(const GridForm& form, const EigenOptions& opts = {});

// ---------------------------------------------------------------------------
// Log-Sobolev lower estimates

/// Ent(f^2) / int |grad f|^2 for f = exp(theta.z / 2), exact in any dimension:
/// 2 delta^2 + 4 KL(pi_theta | w) / |theta|^2 with pi_theta ~ w_i exp(theta.x_i).
double expfamily_ratio(const SmoothedMeasure& sm, const Vector& theta);

/// Same ratio by grid quadrature (d <= 2). Throws SolverError when the tilted
/// mass missing from the grid exceeds `tail_tolerance`; the residual carries it.
double expfamily_ratio_grid(const SmoothedMeasure& sm, const Vector& theta,
                            const GridDomain& grid, double tail_tolerance = 1e-8);

/// Directions (axes, atom differences, top covariance direction) times
/// log-spaced magnitudes.
std::vector<Vector> default_theta_grid(const SmoothedMeasure& sm, int magnitudes = 48);

struct ExpFamilyResult {
  double estimate = 0.0;
  Vector theta;
  std::vector<double> ratios;  // per input theta, NaN for theta = 0
};

ExpFamilyResult estimate_lsi_expfamily(const SmoothedMeasure& sm,
                                       const std::vector<Vector>& thetas);
ExpFamilyResult estimate_lsi_expfamily(const SmoothedMeasure& sm);

/// Ent_m(f^2) / E(f) on a grid form.
double grid_lsi_ratio(const GridForm& form, const Vector& f);

struct GridLsiResult {
  double estimate = 0.0;
  Vector maximizer;
  int iterations = 0;
  std::string start;          // which initialization won
  double expfamily_start = 0.0;
  bool warning = false;
  std::string warning_message;
};

/// Preconditioned projected ascent on Ent(f^2)/E(f) over f >= 0, started from
/// the best exponential-family member, from 1 + eps * (Poincare eigenfunction),
/// and from a seeded random perturbation. `iterations` applies per start.
GridLsiResult estimate_lsi_grid(const SmoothedMeasure& sm, const GridDomain& grid,
                                int iterations, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Identities and auxiliary constants

/// chi^2(N(x, delta^2 I) | N(y, delta^2 I)) = exp(|x - y|^2 / delta^2) - 1.
double chi2_gaussians(const Vector& x, const Vector& y, double delta);

struct DecompositionResult {
  double inner = 0.0;  // int Var_{gamma_{x,delta}}(f) dmu  (or entropies)
  double outer = 0.0;  // Var_mu(x -> int f dgamma_{x,delta})
  double total = 0.0;  // Var_{mu * gamma_delta}(f)
  double residual = 0.0;
  double tail_mass = 0.0;  // largest Gaussian mass missed by the grid
  bool tail_warning = false;
};

DecompositionResult variance_decomposition(const SmoothedMeasure& sm, const Vector& f,
                                           const GridDomain& grid);
/// Same split for Ent(f^2).
DecompositionResult entropy_decomposition(const SmoothedMeasure& sm, const Vector& f,
                                          const GridDomain& grid);

/// int_y^inf e^{-u^2/2} du * int_0^y (1 + u^2) e^{u^2/2} du, evaluated without
/// overflow as a product of two scaled integrals.
double muckenhoupt_product(double y);

struct MuckenhouptResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double argmax = 0.0;
  double window = 0.0;
  bool at_boundary = false;
  int widenings = 0;
};

/// sup_{y >= 0} muckenhoupt_product(y) by bounded maximization on [0, 10],
/// widening the window while the maximizer sits on its edge.
MuckenhouptResult muckenhoupt_constant(double tolerance = 1e-6);

struct TestFunction {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

TestFunction linear_test_function(const Vector& a);
/// u -> u_axis^3.
TestFunction cubic_test_function(int d, int axis);
/// Random combination of coordinate polynomials and sinusoids.
TestFunction random_test_function(int d, std::uint64_t seed);

struct WeightedPoincareReport {
  double worst_ratio = 0.0;
  std::string worst_function;
  std::vector<double> ratios;
  double hardy_constant = 0.0;  // 4 * muckenhoupt
  double bound = 0.0;           // 2 * hardy * (1 + R^2) e^{4 R^2} at delta = 1
  double radius = 0.0;          // R / delta
  bool passed = false;
};

/// Var(f) / int sum_i (1 + u_i^2)^{-1} (d_i f)^2 for one test function.
double weighted_poincare_ratio(const GridForm& form, const TestFunction& f);

/// The measure and grid are rescaled to delta = 1 first. The first two test
/// functions are u_1 and u_1^3; the rest are random.
WeightedPoincareReport weighted_poincare_check(const SmoothedMeasure& sm, const GridDomain& grid,
                                               int trials, std::uint64_t seed);

struct LyapunovFunction {
  std::string name;
  std::function<double(const Vector&)> value;
};

/// W(x) = exp(s |x|^2).
LyapunovFunction exp_quadratic(double s);

struct LyapunovReport {
  std::string function;
  double b = 0.0;
  double c = 0.0;
  double max_violation = 0.0;  // max over nodes of LW/W - (b - c|x|^2)
  double violating_fraction = 0.0;
  std::size_t nodes = 0;
  bool passed = false;
};

/// Checks Delta W - grad V . grad W <= (b - c|x|^2) W at interior nodes with
/// centered differences for W and the exact grad V.
LyapunovReport lyapunov_check(const SmoothedMeasure& sm, const LyapunovFunction& W, double b,
                              double c, const GridDomain& grid, double tolerance = 1e-6);

struct LyapunovSearch {
  double best_s = 0.0;
  LyapunovReport best;
  std::vector<std::pair<double, double>> scan;  // (s, max violation)
  bool admissible_found = false;
};

/// Scans exp(s|x|^2) over `s_values` for the smallest violation.
LyapunovSearch lyapunov_search(const SmoothedMeasure& sm, double b, double c,
                               const GridDomain& grid, const std::vector<double>& s_values);

}  // namespace lsicert
