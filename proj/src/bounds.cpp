#include "lsicert/bounds.hpp"

#include "lsicert/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lsicert {

std::string to_string(InequalityKind k) {
  switch (k) {
    case InequalityKind::poincare: return "poincare";
    case InequalityKind::log_sobolev: return "log_sobolev";
    case InequalityKind::transport: return "transport";
    case InequalityKind::convex_log_sobolev: return "convex_log_sobolev";
  }
  return "unknown";
}

namespace {

void check_scales(double delta, double R) {
  require(std::isfinite(delta) && delta > 0.0, "delta must be positive");
  require(std::isfinite(R) && R >= 0.0, "R must be nonnegative");
}

BoundReport make(std::string name, InequalityKind kind, bool dimension_free, std::string source) {
  BoundReport r;
  r.name = std::move(name);
  r.kind = kind;
  r.dimension_free = dimension_free;
  r.source = std::move(source);
  return r;
}

BoundReport& set_value(BoundReport& r, double v, std::string reason = "applicable") {
  r.valid = std::isfinite(v) && v > 0.0;
  r.value = r.valid ? std::optional<double>(v) : std::nullopt;
  r.reason = r.valid ? std::move(reason) : "value overflows double precision";
  return r;
}

BoundReport& set_inapplicable(BoundReport& r, std::string reason) {
  r.valid = false;
  r.value.reset();
  r.reason = std::move(reason);
  return r;
}

}  // namespace

double gaussian_norm_mean(int d) {
  require(d >= 1, "dimension must be at least 1");
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

double lambda_fn(double p, double q) {
  require(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0, "Lambda arguments must lie in (0, 1)");
  const double lp = std::log(p), lq = std::log(q);
  // Near the diagonal use the series p * (1 + x/2 + x^2/6 + x^3/24) around q = p e^x.
  const double x = lq - lp;
  if (std::abs(x) < 1e-4) return p * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
  return (p - q) / (lp - lq);
}

BoundReport bound_poincare(double delta, double R) {
  check_scales(delta, R);
  auto r = make("poincare", InequalityKind::poincare, true, "mixture-chi2-poincare");
  return set_value(r, delta * delta * std::exp(4.0 * R * R / (delta * delta)));
}

BoundReport bound_lsi_large_variance(double delta, double R) {
  check_scales(delta, R);
  auto r = make("lsi_large_variance", InequalityKind::log_sobolev, true,
                "bakry-emery-large-variance");
  r.note = "printed formula; equals delta^2 at R=0, below the Gaussian constant 2 delta^2";
  if (!(delta > R)) return set_inapplicable(r, "requires delta > R");
  return set_value(r, std::pow(delta, 4) / (delta * delta - R * R));
}

BoundReport bound_lsi_large_variance_corrected(double delta, double R) {
  check_scales(delta, R);
  auto r = make("lsi_large_variance_corrected", InequalityKind::log_sobolev, true,
                "bakry-emery-large-variance");
  r.note = "C_LS <= 2/rho with rho = 1/delta^2 - R^2/delta^4";
  if (!(delta > R)) return set_inapplicable(r, "requires delta > R");
  return set_value(r, 2.0 * std::pow(delta, 4) / (delta * delta - R * R));
}

BoundReport bound_lsi_dim1(double delta, double R) {
  check_scales(delta, R);
  auto r = make("lsi_dim1", InequalityKind::log_sobolev, true, "miclo-holley-stroock-dim1");
  r.note = "d = 1, or radially symmetric mu in any dimension";
  return set_value(r, 4.0 * delta * delta *
                          std::exp((8.0 / std::numbers::pi) * R * R / (delta * delta)));
}

BoundReport bound_lsi_miclo(double delta, double R, int d) {
  check_scales(delta, R);
  require(d >= 1, "dimension must be at least 1");
  auto r = make("lsi_miclo", InequalityKind::log_sobolev, false, "miclo-holley-stroock");
  const double a1 = gaussian_norm_mean(1), ad = gaussian_norm_mean(d);
  return set_value(r, 4.0 * delta * delta * std::exp(4.0 * a1 * ad * R * R / (delta * delta)));
}

LyapunovParams lyapunov_params(double delta, double R, int d) {
  check_scales(delta, R);
  require(d >= 1, "dimension must be at least 1");
  require(R > 0.0, "Lyapunov assembly needs R > 0");
  const double d2 = delta * delta, d4 = d2 * d2;
  LyapunovParams p;
  p.b = d / (8.0 * d2) + R * R / (32.0 * d4);
  p.c = 1.0 / (64.0 * d4);
  p.K = R * R / d4;
  p.epsilon = 2.0 / p.K;
  p.second_moment = R * R + d * d2;
  const double lead = (2.0 / p.c) * (1.0 / p.epsilon + p.K / 2.0);
  p.A = lead + p.epsilon;
  p.B = lead * (p.b + p.c * p.second_moment);
  return p;
}

BoundReport bound_lsi_lyapunov(double delta, double R, int d) {
  check_scales(delta, R);
  require(d >= 1, "dimension must be at least 1");
  auto r = make("lsi_lyapunov", InequalityKind::log_sobolev, false, "cgw-lyapunov");
  r.note = "epsilon = 2/K, second moment bounded by R^2 + d delta^2";
  if (R <= 0.0) return set_inapplicable(r, "requires R > 0 (K = 0); use the Gaussian constants");
  if (delta > R) return set_inapplicable(r, "stated for the low variance case delta <= R");
  const LyapunovParams p = lyapunov_params(delta, R, d);
  const double cp = *bound_poincare(delta, R).value;
  return set_value(r, p.A + (p.B + 2.0) * cp);
}

BoundReport bound_lsi_zimmermann(double delta, double R, int d) {
  check_scales(delta, R);
  require(d >= 1, "dimension must be at least 1");
  auto r = make("lsi_zimmermann", InequalityKind::log_sobolev, false, "zimmermann-low-variance");
  r.note = "comparison baseline, K4 = 289";
  if (delta > R) return set_inapplicable(r, "requires delta <= R");
  return set_value(r, 289.0 * R * R * std::exp(20.0 * d + 5.0 * R * R / (delta * delta)));
}

BoundReport bound_lsi_discrete(double delta, double R, int N) {
  check_scales(delta, R);
  auto r = make("lsi_discrete", InequalityKind::log_sobolev, true, "schlichting-discrete");
  r.note = "constant term 2 delta^2; the variant with delta^2 is not used";
  if (N < 3) return set_inapplicable(r, "requires a uniform measure on N >= 3 points");
  const double d2 = delta * delta;
  return set_value(r, 2.0 * d2 + 3.0 * std::log(static_cast<double>(N)) * d2 *
                                     std::exp(4.0 * R * R / d2));
}

TransportBound bound_transport(double delta, double R, double c_prime, int d) {
  check_scales(delta, R);
  require(std::isfinite(c_prime) && c_prime > 0.0, "c' must be positive");
  require(d >= 1, "dimension must be at least 1");
  const double d2 = delta * delta;
  const double c = c_prime * d2 * (1.0 + R * R / d2) * std::exp(4.0 * R * R / d2);
  TransportBound tb;
  tb.l4 = make("transport_l4", InequalityKind::transport, true, "gozlan-weighted-transport");
  tb.l4.note = "c' = " + std::to_string(c_prime) + " (universal constant, not fixed numerically)";
  set_value(tb.l4, c);
  tb.euclidean =
      make("transport_euclidean", InequalityKind::transport, false, "gozlan-weighted-transport");
  tb.euclidean.note = tb.l4.note;
  set_value(tb.euclidean, std::sqrt(static_cast<double>(d)) * c);
  return tb;
}

BoundReport bound_convex_lsi(double delta, double R) {
  check_scales(delta, R);
  auto r = make("convex_lsi", InequalityKind::convex_log_sobolev, true, "maurey-convex-tau");
  r.note = "Ent(e^f) <= C int |grad f|^2 e^f for convex f";
  return set_value(r, 8.0 * (delta * delta + 4.0 * R * R));
}

std::vector<BoundReport> lsi_candidates(double delta, double R, int d, std::optional<int> N,
                                        bool radial) {
  std::vector<BoundReport> out;
  out.push_back(bound_lsi_large_variance_corrected(delta, R));
  auto dim1 = bound_lsi_dim1(delta, R);
  if (d != 1 && !radial) set_inapplicable(dim1, "needs d = 1 or a radially symmetric measure");
  out.push_back(dim1);
  out.push_back(bound_lsi_miclo(delta, R, d));
  out.push_back(bound_lsi_lyapunov(delta, R, d));
  if (N) {
    out.push_back(bound_lsi_discrete(delta, R, *N));
  } else {
    auto disc = make("lsi_discrete", InequalityKind::log_sobolev, true, "schlichting-discrete");
    out.push_back(set_inapplicable(disc, "measure is not uniform discrete"));
  }
  return out;
}

BoundReport best_bound(double delta, double R, int d, std::optional<int> N, bool radial) {
  const auto cands = lsi_candidates(delta, R, d, N, radial);
  const BoundReport* best = nullptr;
  for (const auto& c : cands) {
    if (c.valid && (!best || *c.value < *best->value)) best = &c;
  }
  BoundReport r = make("best_lsi", InequalityKind::log_sobolev, false, "none");
  if (!best) return set_inapplicable(r, "no applicable bound");
  r = *best;
  r.note = "winner: " + best->name;
  r.name = "best_lsi";
  return r;
}

std::vector<BoundReport> all_bounds(double delta, double R, int d, std::optional<int> N,
                                    double c_prime) {
  std::vector<BoundReport> out;
  out.push_back(bound_poincare(delta, R));
  out.push_back(bound_lsi_large_variance(delta, R));
  out.push_back(bound_lsi_large_variance_corrected(delta, R));
  auto dim1 = bound_lsi_dim1(delta, R);
  if (d != 1) set_inapplicable(dim1, "needs d = 1 or a radially symmetric measure");
  out.push_back(dim1);
  out.push_back(bound_lsi_miclo(delta, R, d));
  out.push_back(bound_lsi_lyapunov(delta, R, d));
  out.push_back(bound_lsi_zimmermann(delta, R, d));
  if (N) {
    out.push_back(bound_lsi_discrete(delta, R, *N));
  }
  auto tb = bound_transport(delta, R, c_prime, d);
  out.push_back(tb.l4);
  out.push_back(tb.euclidean);
  out.push_back(bound_convex_lsi(delta, R));
  out.push_back(best_bound(delta, R, d, N, false));
  return out;
}

}  // namespace lsicert
