#pragma once

#include <optional>
#include <string>
#include <vector>

namespace lsicert {

enum class InequalityKind { poincare, log_sobolev, transport, convex_log_sobolev };

std::string to_string(InequalityKind k);

/// One explicit constant bound, evaluated at fixed parameters.
/// `value` is present iff `valid`.
struct BoundReport {
  std::string name;
  std::optional<double> value;
  InequalityKind kind = InequalityKind::log_sobolev;
  bool valid = false;
  std::string reason;  // why the bound is (in)applicable
  bool dimension_free = false;
  std::string source;  // which result the formula instantiates
  std::string note;    // known discrepancies, conventions
};

/// Parameters of the Lyapunov-function log-Sobolev criterion
/// C_LS <= A + (B + 2) C_P.
struct LyapunovParams {
  double b = 0.0;
  double c = 0.0;
  double K = 0.0;
  double epsilon = 0.0;
  double second_moment = 0.0;
  double A = 0.0;
  double B = 0.0;
};

/// E|Z| for Z standard Gaussian in dimension d: sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
double gaussian_norm_mean(int d);

/// Logarithmic mean (p - q) / (log p - log q), with Lambda(p, p) = p.
double lambda_fn(double p, double q);

BoundReport bound_poincare(double delta, double R);
/// Printed large-variance formula delta^4 / (delta^2 - R^2).
BoundReport bound_lsi_large_variance(double delta, double R);
/// Bakry-Emery with C_LS <= 2/rho applied to rho = 1/delta^2 - R^2/delta^4.
BoundReport bound_lsi_large_variance_corrected(double delta, double R);
BoundReport bound_lsi_dim1(double delta, double R);
BoundReport bound_lsi_miclo(double delta, double R, int d);
LyapunovParams lyapunov_params(double delta, double R, int d);
BoundReport bound_lsi_lyapunov(double delta, double R, int d);
BoundReport bound_lsi_zimmermann(double delta, double R, int d);
/// Uniform discrete mu on N >= 3 points: 2 delta^2 + 3 log(N) delta^2 exp(4 R^2 / delta^2).
BoundReport bound_lsi_discrete(double delta, double R, int N);

struct TransportBound {
  BoundReport l4;         // T_{2,4} <= C(R, delta) H
  BoundReport euclidean;  // T_2 <= sqrt(d) C(R, delta) H
};
TransportBound bound_transport(double delta, double R, double c_prime, int d = 1);

BoundReport bound_convex_lsi(double delta, double R);

/// Every log-Sobolev bound applicable at the given parameters (best_bound candidates).
std::vector<BoundReport> lsi_candidates(double delta, double R, int d, std::optional<int> N,
                                        bool radial);

/// Minimum over the applicable log-Sobolev bounds; `source` names the winner.
/// `N` is passed only for uniform discrete measures; `radial` enables the
/// one-dimensional formula in any dimension.
BoundReport best_bound(double delta, double R, int d, std::optional<int> N = std::nullopt,
                       bool radial = false);

/// Every bound of the catalog at one parameter point, for tabulation.
std::vector<BoundReport> all_bounds(double delta, double R, int d, std::optional<int> N,
                                    double c_prime);

}  // namespace lsicert
