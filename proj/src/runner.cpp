#include "lsicert/runner.hpp"

#include "lsicert/bounds.hpp"
#include "lsicert/concentration.hpp"
#include "lsicert/decompositions.hpp"
#include "lsicert/kernels.hpp"
#include "lsicert/measure.hpp"
#include "lsicert/rng.hpp"
#include "lsicert/spectral.hpp"
#include "lsicert/transport.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace lsicert {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [p, ec] = std::from_chars(first, last, v);
  require(ec == std::errc() && p == last, "config key '" + key + "': cannot parse '" + s + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& s) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) out.push_back(parse_number<T>(key, item));
  require(!out.empty(), "config key '" + key + "' needs a nonempty list");
  return out;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "subcommand") cfg.subcommand = value;
  else if (key == "check") cfg.check = value;
  else if (key == "measure") cfg.measure_path = value;
  else if (key == "delta") cfg.deltas = parse_list<double>(key, value);
  else if (key == "R") cfg.radii = parse_list<double>(key, value);
  else if (key == "d") cfg.dims = parse_list<int>(key, value);
  else if (key == "N") cfg.counts = parse_list<int>(key, value);
  else if (key == "grid_nodes") cfg.grid_nodes = parse_number<int>(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "c_prime") cfg.c_prime = parse_number<double>(key, value);
  else if (key == "tolerance") cfg.tolerance = parse_number<double>(key, value);
  else if (key == "lsi_iterations") cfg.lsi_iterations = parse_number<int>(key, value);
  else if (key == "tail_samples") cfg.tail_samples = parse_number<std::size_t>(key, value);
  else if (key == "t_grid") cfg.t_grid = parse_list<double>(key, value);
  else if (key == "transport_nodes") cfg.transport_nodes = parse_number<int>(key, value);
  else if (key == "transport_members") cfg.transport_members = parse_number<int>(key, value);
  else if (key == "cost") cfg.cost = value;
  else if (key == "sweep_trials") cfg.sweep_trials = parse_number<int>(key, value);
  else if (key == "N_schedule") cfg.n_schedule = value;
  else if (key == "jobs") cfg.jobs = parse_number<int>(key, value);
  else throw InputError("unknown config key '" + key + "'");
  cfg.entries.emplace_back(key, value);
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config file " + path);
  return parse_config(in);
}

int schedule_count(const std::string& schedule, int d) {
  if (schedule == "d") return d;
  if (schedule == "2d") return 2 * d;
  if (schedule == "d^2") return d * d;
  const int n = parse_number<int>("N_schedule", schedule);
  require(n >= 1, "N_schedule must be positive");
  return n;
}

const std::vector<std::string>& verify_checks() {
  static const std::vector<std::string> names{
      "poincare", "lsi",       "hessian",          "decomposition", "miclo",
      "cost-chain", "transport", "herbst",        "convex-lsi",    "radial",
      "muckenhoupt", "inf-convolution", "kappa", "weighted-poincare", "lyapunov"};
  return names;
}

// ---------------------------------------------------------------------------
// Output helpers

namespace {

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
json optional_value(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[i] = digits[h & 15];
  return s;
}

class Session {
 public:
  explicit Session(const RunConfig& cfg) : cfg_(cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    require(!ec && fs::is_directory(cfg.out_dir), "cannot create output directory " + cfg.out_dir);
    const fs::path probe = fs::path(cfg.out_dir) / ".write-probe";
    {
      std::ofstream p(probe);
      require(static_cast<bool>(p), "output directory " + cfg.out_dir + " is not writable");
    }
    fs::remove(probe, ec);
  }

  void write(const std::string& name, const std::string& text) {
    const fs::path p = fs::path(cfg_.out_dir) / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    require(static_cast<bool>(out), "failed to write " + p.string());
    result.artifacts.push_back(name);
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void fail(const std::string& what) { result.failures.push_back(what); }

  std::optional<SmoothedMeasure> measure;
  RunResult result;

 private:
  const RunConfig& cfg_;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const SmoothedMeasure& need_measure(Session& s) {
  require(s.measure.has_value(), "this subcommand needs 'measure' in the config");
  return *s.measure;
}

SmoothedMeasure two_atom(int d, double R, double delta, double weight = 0.5) {
  Matrix X = Matrix::Zero(d, 2);
  X(0, 0) = R;
  X(0, 1) = -R;
  Vector w(2);
  w << weight, 1.0 - weight;
  return SmoothedMeasure(BallMeasure(X, w), delta);
}

SmoothedMeasure gaussian(int d, double delta) { return SmoothedMeasure(BallMeasure::point_mass(d), delta); }

std::optional<int> uniform_count(const SmoothedMeasure& sm) {
  if (sm.base().is_uniform()) return sm.base().size();
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_bounds(const RunConfig& cfg, Session& s) {
  std::ostringstream csv;
  csv << "name,delta,R,d,N,value,valid,dimension_free,source\n";
  std::vector<std::optional<int>> Ns;
  if (cfg.counts.empty()) Ns.push_back(std::nullopt);
  for (int n : cfg.counts) Ns.push_back(n);
  for (double delta : cfg.deltas)
    for (double R : cfg.radii)
      for (int d : cfg.dims)
        for (const auto& N : Ns) {
          for (const auto& b : all_bounds(delta, R, d, N, cfg.c_prime.value_or(1.0))) {
            csv << csv_field(b.name) << ',' << csv_number(delta) << ',' << csv_number(R) << ',' << d << ','
                << (N ? std::to_string(*N) : std::string()) << ','
                << (b.value ? csv_number(*b.value) : std::string()) << ',' << (b.valid ? "true" : "false")
                << ',' << (b.dimension_free ? "true" : "false") << ',' << csv_field(b.source) << '\n';
          }
        }
  s.write("bounds.csv", csv.str());
}

void cmd_estimate(const RunConfig& cfg, Session& s) {
  const SmoothedMeasure& sm = need_measure(s);
  const int d = sm.dimension();
  const double delta = sm.delta(), R = sm.radius();
  json j;
  j["measure_digest"] = measure_digest(sm);
  j["d"] = d;
  j["N"] = sm.base().size();
  j["delta"] = delta;
  j["R"] = R;

  const BoundReport bp = bound_poincare(delta, R);
  const BoundReport best = best_bound(delta, R, d, uniform_count(sm));
  j["best_bound"] = {{"value", optional_value(best.value)}, {"source", best.source}, {"name", best.name}};
  j["poincare_bound"] = {{"value", optional_value(bp.value)}, {"source", bp.source}};

  const ExpFamilyResult ef = estimate_lsi_expfamily(sm);
  j["lsi_expfamily"] = {{"estimate", ef.estimate}, {"source", "exponential-family-test-functions"}};
  double lsi_max = ef.estimate;

  if (d <= 2) {
    const GridDomain grid = GridDomain::default_for(sm, cfg.grid_nodes);
    const RayleighResult pr = estimate_poincare(sm, grid);
    j["poincare"] = {{"estimate", pr.constant_estimate},
                     {"eigenvalue", pr.eigenvalue},
                     {"residual", pr.residual},
                     {"iterations", pr.iterations},
                     {"grid_nodes", grid.nodes_per_axis()},
                     {"grid_half_width", grid.half_width()},
                     {"source", "grid-generalized-eigenproblem"}};
    if (pr.constant_estimate > *bp.value * (1.0 + cfg.tolerance))
      s.fail("poincare estimate " + format_double(pr.constant_estimate) + " exceeds bound " +
             format_double(*bp.value));
    const GridLsiResult gl = estimate_lsi_grid(sm, grid, cfg.lsi_iterations, derive_seed(cfg.seed, 1));
    j["lsi_grid"] = {{"estimate", gl.estimate},
                     {"start", gl.start},
                     {"warning", gl.warning},
                     {"warning_message", gl.warning_message},
                     {"iterations", gl.iterations},
                     {"source", "grid-entropy-ratio-ascent"}};
    lsi_max = std::max(lsi_max, gl.estimate);
  } else {
    j["poincare"] = nullptr;
    j["lsi_grid"] = nullptr;
  }
  j["lsi_lower_estimate"] = lsi_max;
  if (best.value && lsi_max > *best.value * (1.0 + cfg.tolerance))
    s.fail("log-Sobolev lower estimate " + format_double(lsi_max) + " exceeds best bound " +
           format_double(*best.value));
  j["passed"] = s.result.failures.empty();
  s.write_json("estimate.json", j);
}

void cmd_decompose(const RunConfig& cfg, Session& s) {
  const SmoothedMeasure& sm = need_measure(s);
  RegularizeSpec spec;
  spec.seed = derive_seed(cfg.seed, 3);
  const MicloDecomposition dec = miclo_decompose(sm, std::nullopt, spec);
  json j;
  j["measure_digest"] = measure_digest(sm);
  j["sigma"] = dec.sigma;
  j["rho"] = dec.rho;
  j["rho_effective"] = dec.rho_effective;
  j["sup_Ub_bound"] = dec.bound_sup_Ub;
  j["hessian_bound"] = dec.hessian_bound;
  j["assembled_bound"] = optional_value(dec.assembled.value);
  j["assembled_source"] = dec.assembled.source;
  const BoundReport ref = bound_lsi_miclo(sm.delta(), sm.radius(), sm.dimension());
  j["reference_bound"] = optional_value(ref.value);
  j["reference_source"] = ref.source;
  if (sm.dimension() <= 2) {
    const GridDomain grid(sm.dimension(), sm.radius() + 4.0 * sm.delta(),
                          cfg.grid_nodes.value_or(sm.dimension() == 1 ? 201 : 41));
    const ConvexityReport cr = miclo_convexity_check(dec, grid);
    j["numeric_sup_Ub"] = cr.numeric_sup_Ub;
    j["convexity_margin"] = cr.margin;
    j["max_second_derivative"] = cr.max_abs_second_derivative;
    j["uc_margin"] = cr.uc_margin;
    j["convexity_passed"] = cr.passed;
    if (!cr.passed) s.fail("regularized potential exceeds its curvature or sup bound on the grid");
  } else {
    j["numeric_sup_Ub"] = nullptr;
    j["convexity_margin"] = nullptr;
    j["convexity_passed"] = nullptr;
  }
  s.write_json("decompose.json", j);
}

std::string transport_csv(const TransportEntropyReport& rep, const std::string& source) {
  std::ostringstream csv;
  csv << "family_member,cost_kind,T_value,H_value,ratio,bound,pass,source\n";
  for (const auto& r : rep.rows) {
    csv << csv_field(r.member) << ',' << r.cost_kind << ',' << csv_number(r.T) << ',' << csv_number(r.H) << ','
        << csv_number(r.ratio) << ',' << csv_number(r.bound) << ',' << (r.skipped ? "skipped" : r.pass ? "true" : "false")
        << ',' << source << '\n';
  }
  return csv.str();
}

void cmd_transport(const RunConfig& cfg, Session& s) {
  const SmoothedMeasure& sm = need_measure(s);
  require(sm.dimension() <= 2, "transport runs on 1D or 2D grids");
  const int n = cfg.grid_nodes.value_or(cfg.transport_nodes);
  const GridDomain grid(sm.dimension(), sm.radius() + 4.0 * sm.delta(), n);
  CostSpec spec{parse_cost_kind(cfg.cost), std::nullopt};
  if (spec.kind == CostKind::tilde_k) spec.D = std::max(1.0, sm.radius() + sm.delta());
  const auto family = transport_family(sm, grid, cfg.transport_members, derive_seed(cfg.seed, 4));
  TransportEntropyReport rep = verify_transport_entropy(sm, grid, family, spec, cfg.c_prime);
  if (!cfg.c_prime && std::isfinite(rep.c_prime_needed)) {
    // Rows are reported against the calibrated constant.
    for (auto& r : rep.rows) {
      r.bound = rep.c_prime_needed * rep.formula_at_unit_c;
      r.pass = r.skipped || r.ratio <= r.bound * (1.0 + 1e-12);
    }
  }
  const std::string source =
      spec.kind == CostKind::quadratic ? "transport-entropy-euclidean" : "transport-entropy-l4";
  s.write("transport.csv", transport_csv(rep, source));
  json j;
  j["max_ratio"] = rep.max_ratio;
  j["c_prime_needed"] = number_or_null(rep.c_prime_needed);
  j["c_prime"] = cfg.c_prime ? json(*cfg.c_prime) : json(nullptr);
  j["formula_at_unit_c"] = rep.formula_at_unit_c;
  j["passed"] = rep.passed;
  j["grid_nodes"] = n;
  j["cost_kind"] = to_string(spec.kind);
  s.write_json("transport.json", j);
  if (cfg.c_prime) {
    if (!rep.passed) s.fail("transport-entropy ratio exceeds the bound at c' = " + format_double(*cfg.c_prime));
  } else if (!(rep.c_prime_needed <= 1e3)) {
    s.fail("no c' <= 1000 bounds the transport-entropy ratios");
  }
}

std::vector<LipschitzSpec> lipschitz_specs(int d) {
  Vector p = Vector::Zero(d);
  p[0] = 0.5;
  return {LipschitzSpec::linear(Vector::Unit(d, 0)), LipschitzSpec::distance_to_point(p),
          LipschitzSpec::max_coordinate(d)};
}

void cmd_concentration(const RunConfig& cfg, Session& s) {
  const SmoothedMeasure& sm = need_measure(s);
  std::ostringstream csv;
  csv << "function,t,empirical_tail,standard_error,bound,violation,source\n";
  json j;
  int violations = 0;
  std::uint64_t stream = 10;
  for (const auto& f : lipschitz_specs(sm.dimension())) {
    const TailCheckReport r =
        herbst_tail_check(sm, f, cfg.t_grid, cfg.tail_samples, derive_seed(cfg.seed, stream++));
    for (std::size_t k = 0; k < r.t_values.size(); ++k) {
      csv << r.function << ',' << csv_number(r.t_values[k]) << ',' << csv_number(r.empirical_tail[k]) << ','
          << csv_number(r.standard_error[k]) << ',' << csv_number(r.theoretical_bound[k]) << ','
          << (r.violation[k] ? "true" : "false") << ",herbst-tail\n";
    }
    violations += r.violations;
    j["tails"][r.function] = {{"m_hat", r.m_hat}, {"violations", r.violations}, {"t_epsilon", r.t_epsilon}};
  }
  s.write("tails.csv", csv.str());
  j["tail_violations"] = violations;
  if (violations > 0) s.fail(std::to_string(violations) + " tail bound violations beyond 3 standard errors");

  const auto family = builtin_convex_family(sm.dimension(), sm.delta(), derive_seed(cfg.seed, 5));
  std::optional<GridDomain> grid;
  const ConvexLsiReport cl = convex_lsi_check(sm, family, grid, 200000, derive_seed(cfg.seed, 6));
  json rows = json::array();
  for (const auto& r : cl.rows) rows.push_back({{"name", r.name}, {"ratio", r.ratio}, {"skipped", r.skipped}});
  j["convex_lsi"] = {{"rows", rows}, {"max_ratio", cl.max_ratio}, {"bound", cl.bound},
                     {"method", cl.method}, {"passed", cl.passed}, {"source", "convex-log-sobolev"}};
  if (!cl.passed) s.fail("convex log-Sobolev ratio above 8 (delta^2 + 4 R^2)");

  const KappaReport kr = kappa_region(sm.delta(), sm.radius(), 0.5);
  j["kappa"] = {{"kappa", kr.kappa},       {"kappa_positive", kr.kappa_positive},
                {"ratio", kr.ratio},       {"threshold", kr.threshold},
                {"in_region", kr.in_region}, {"hypothesis_holds", kr.hypothesis_holds},
                {"applicable", kr.applicable}, {"epsilon", 0.5}};
  if (sm.radius() > 0.0) {
    const InfConvolutionReport ic = inf_convolution_identity(sm.radius(), sm.delta(), 10000, derive_seed(cfg.seed, 7));
    j["inf_convolution"] = {{"max_error", ic.max_abs_error}, {"max_split_error", ic.max_split_error},
                            {"passed", ic.passed}, {"trials", ic.trials}};
    if (!ic.passed) s.fail("inf-convolution identity off by more than 1e-9");
  }
  j["passed"] = s.result.failures.empty();
  s.write_json("concentration.json", j);
}

void cmd_sweep(const RunConfig& cfg, Session& s) {
  const std::string schedule = cfg.n_schedule;
  const auto records = conjecture_sweep(
      cfg.dims, [&](int d) { return schedule_count(schedule, d); }, cfg.radii.front(), cfg.deltas.front(),
      cfg.sweep_trials, cfg.seed);
  std::ostringstream csv;
  csv << "d,N,seed,estimator,estimate,candidate_bound,ratio,flag,measure,candidate,digest,reason\n";
  int flagged = 0;
  for (const auto& r : records) {
    csv << r.d << ',' << r.N << ',' << r.seed << ',' << r.estimator << ',' << csv_number(r.estimate) << ','
        << csv_number(r.candidate_bound) << ',' << csv_number(r.ratio) << ',' << r.flag << ',' << r.measure
        << ',' << r.candidate << ',' << r.digest << ',' << csv_field(r.reason) << '\n';
    if (r.flag == "investigate") ++flagged;
  }
  s.write("sweep.csv", csv.str());
  s.write_json("sweep.json", {{"records", records.size()}, {"investigate", flagged}});
}

// ---------------------------------------------------------------------------
// verify targets

struct Outcome {
  bool passed = false;
  json detail;
};

Outcome verify_poincare(const RunConfig& cfg, const std::optional<SmoothedMeasure>& m) {
  Outcome o{true, json::object()};
  if (m) {
    require(m->dimension() <= 2, "poincare verification needs d <= 2");
    const RayleighResult r = estimate_poincare(*m, GridDomain::default_for(*m, cfg.grid_nodes));
    const double b = *bound_poincare(m->delta(), m->radius()).value;
    o.passed = r.constant_estimate <= b * (1.0 + cfg.tolerance);
    o.detail = {{"estimate", r.constant_estimate}, {"bound", b}};
    return o;
  }
  for (double delta : {0.5, 1.0, 2.0}) {
    const RayleighResult r = estimate_poincare(gaussian(1, delta), GridDomain(1, 8.0 * delta, 2001));
    const double rel = std::abs(r.constant_estimate / (delta * delta) - 1.0);
    o.passed = o.passed && rel <= 0.01;
    o.detail[format_double(delta)] = {{"estimate", r.constant_estimate}, {"relative_error", rel}};
  }
  return o;
}

Outcome verify_lsi(const RunConfig& cfg, const std::optional<SmoothedMeasure>& m) {
  Outcome o{true, json::object()};
  const double est = estimate_lsi_expfamily(gaussian(1, 1.0)).estimate;
  o.passed = std::abs(est - 2.0) <= 1e-9;
  o.detail["gaussian_expfamily"] = est;
  if (m) {
    const double lsi = estimate_lsi_expfamily(*m).estimate;
    const BoundReport best = best_bound(m->delta(), m->radius(), m->dimension(), uniform_count(*m));
    o.detail["measure_expfamily"] = lsi;
    o.detail["best_bound"] = optional_value(best.value);
    if (best.value) o.passed = o.passed && lsi <= *best.value * (1.0 + cfg.tolerance);
  }
  return o;
}

Outcome verify_hessian(const RunConfig& cfg, const SmoothedMeasure& sm) {
  const Matrix pts = sample(sm, 10000, derive_seed(cfg.seed, 20));
  const auto hr = kernels::hessian_range(sm, pts);
  const double d2 = sm.delta() * sm.delta();
  const double lo = 1.0 / d2 - sm.radius() * sm.radius() / (d2 * d2);
  const double hi = 1.0 / d2;
  return {hr.min_eigenvalue >= lo - 1e-6 && hr.max_eigenvalue <= hi + 1e-6,
          {{"min_eigenvalue", hr.min_eigenvalue}, {"lower", lo}, {"max_eigenvalue", hr.max_eigenvalue}, {"upper", hi}}};
}

Outcome verify_decomposition(const RunConfig& cfg, const SmoothedMeasure& sm) {
  require(sm.dimension() <= 2, "decomposition verification needs d <= 2");
  const GridDomain grid = GridDomain::default_for(sm, cfg.grid_nodes.value_or(sm.dimension() == 1 ? 801 : 81));
  const TestFunction tf = random_test_function(sm.dimension(), derive_seed(cfg.seed, 21));
  Vector f(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) f[k] = tf.value(grid.node(k));
  const auto v = variance_decomposition(sm, f, grid);
  const auto e = entropy_decomposition(sm, f, grid);
  return {v.residual <= 1e-8 && e.residual <= 1e-8,
          {{"variance_residual", v.residual}, {"entropy_residual", e.residual}}};
}

Outcome verify_miclo(const RunConfig&, const SmoothedMeasure& sm) {
  require(sm.dimension() <= 2, "miclo verification needs d <= 2");
  const MicloDecomposition dec = miclo_decompose(sm);
  const GridDomain grid(sm.dimension(), sm.radius() + 4.0 * sm.delta(), sm.dimension() == 1 ? 201 : 41);
  const ConvexityReport cr = miclo_convexity_check(dec, grid);
  const double ref = *bound_lsi_miclo(sm.delta(), sm.radius(), sm.dimension()).value;
  const double rel = std::abs(*dec.assembled.value / ref - 1.0);
  return {cr.passed && rel <= 1e-12,
          {{"numeric_sup_Ub", cr.numeric_sup_Ub}, {"sup_bound", cr.sup_bound},
           {"max_second_derivative", cr.max_abs_second_derivative}, {"hessian_bound", cr.hessian_bound},
           {"assembled_relative_error", rel}}};
}

Outcome verify_cost_chain(const RunConfig& cfg) {
  Outcome o{true, json::object()};
  for (int d : {1, 2, 3, 8}) {
    const CostChainReport r = cost_chain_checks(100000, d, derive_seed(cfg.seed, 30 + d));
    std::uint64_t v = 0;
    for (const auto& c : r.checks) v += c.violations;
    o.passed = o.passed && r.passed;
    o.detail[std::to_string(d)] = {{"violations", v}, {"checks", r.checks.size()}};
  }
  return o;
}

Outcome verify_transport(const RunConfig& cfg, const SmoothedMeasure& sm) {
  require(sm.dimension() <= 2, "transport verification needs d <= 2");
  const GridDomain grid(sm.dimension(), sm.radius() + 4.0 * sm.delta(), sm.dimension() == 1 ? 64 : 16);
  const auto family = transport_family(sm, grid, 8, derive_seed(cfg.seed, 40));
  const auto rep = verify_transport_entropy(sm, grid, family, CostSpec::l4sq());
  return {std::isfinite(rep.c_prime_needed) && rep.c_prime_needed <= 1e3,
          {{"c_prime_needed", number_or_null(rep.c_prime_needed)}, {"max_ratio", rep.max_ratio}}};
}

Outcome verify_herbst(const RunConfig& cfg, const SmoothedMeasure& sm) {
  Outcome o{true, json::object()};
  std::uint64_t stream = 50;
  for (const auto& f : lipschitz_specs(sm.dimension())) {
    const auto r = herbst_tail_check(sm, f, cfg.t_grid, std::max<std::size_t>(cfg.tail_samples, 100000),
                                     derive_seed(cfg.seed, stream++));
    o.passed = o.passed && r.violations == 0;
    o.detail[r.function] = r.violations;
  }
  return o;
}

Outcome verify_convex_lsi(const RunConfig& cfg, const SmoothedMeasure& sm) {
  const auto family = builtin_convex_family(sm.dimension(), sm.delta(), derive_seed(cfg.seed, 60));
  const auto r = convex_lsi_check(sm, family, std::nullopt, 200000, derive_seed(cfg.seed, 61));
  return {r.passed, {{"max_ratio", r.max_ratio}, {"bound", r.bound}}};
}

Outcome verify_radial() {
  const auto r = radial_convexity_check([](double x) { return 0.5 * x * x; }, 1.0, 2, GridDomain(2, 3.0, 61));
  return {r.passed, {{"min_eigenvalue", r.min_eigenvalue}, {"rho", r.rho}}};
}

Outcome verify_muckenhoupt() {
  const auto r = muckenhoupt_constant();
  return {std::abs(r.value - 1.0) <= 1e-4 && r.value <= 1.0 + 1e-9,
          {{"value", r.value}, {"error_estimate", r.error_estimate}, {"window", r.window}}};
}

Outcome verify_inf_convolution(const RunConfig& cfg, const SmoothedMeasure& sm) {
  const double R = sm.radius() > 0.0 ? sm.radius() : 1.0;
  const auto r = inf_convolution_identity(R, sm.delta(), 10000, derive_seed(cfg.seed, 70));
  return {r.passed, {{"max_error", r.max_abs_error}, {"max_split_error", r.max_split_error}}};
}

Outcome verify_kappa() {
  const KappaReport inside = kappa_region(0.8, 1.0, 0.7);
  const KappaReport outside = kappa_region(0.7, 1.0, 0.7);
  const KappaReport edge = kappa_region(1.0, 1.0, 0.7);
  return {inside.applicable && !outside.applicable && edge.kappa == 0.0,
          {{"inside_ratio", inside.ratio}, {"inside_threshold", inside.threshold}}};
}

Outcome verify_weighted_poincare(const RunConfig& cfg, const SmoothedMeasure& sm) {
  require(sm.dimension() <= 2, "weighted Poincare verification needs d <= 2");
  const auto r = weighted_poincare_check(sm, GridDomain::default_for(sm, sm.dimension() == 1 ? 801 : 81), 6,
                                         derive_seed(cfg.seed, 80));
  return {r.passed, {{"worst_ratio", r.worst_ratio}, {"bound", r.bound}, {"worst_function", r.worst_function}}};
}

Outcome verify_lyapunov() {
  const double s = 0.1;
  const SmoothedMeasure g = gaussian(1, 1.0);
  const auto r = lyapunov_check(g, exp_quadratic(s), 2.0 * s + 1e-3, 2.0 * s - 4.0 * s * s, GridDomain(1, 6.0, 1201));
  return {r.passed, {{"max_violation", r.max_violation}}};
}

void cmd_verify(const RunConfig& cfg, Session& s) {
  std::vector<std::string> targets;
  if (cfg.check.empty() || cfg.check == "all") {
    targets = verify_checks();
  } else {
    for (const auto& c : split_list(cfg.check)) {
      require(std::find(verify_checks().begin(), verify_checks().end(), c) != verify_checks().end(),
              "unknown verify target '" + c + "'");
      targets.push_back(c);
    }
  }
  const std::optional<SmoothedMeasure>& given = s.measure;
  const int d0 = given ? given->dimension() : 1;
  const SmoothedMeasure fallback = two_atom(d0 <= 2 ? d0 : 1, 0.5, 1.0, 0.4);
  const SmoothedMeasure& sm = given ? *given : fallback;

  json report = json::object();
  for (const auto& t : targets) {
    Outcome o;
    try {
      if (t == "poincare") o = verify_poincare(cfg, given);
      else if (t == "lsi") o = verify_lsi(cfg, given);
      else if (t == "hessian") o = verify_hessian(cfg, sm);
      else if (t == "decomposition") o = verify_decomposition(cfg, sm);
      else if (t == "miclo") o = verify_miclo(cfg, sm);
      else if (t == "cost-chain") o = verify_cost_chain(cfg);
      else if (t == "transport") o = verify_transport(cfg, sm);
      else if (t == "herbst") o = verify_herbst(cfg, sm);
      else if (t == "convex-lsi") o = verify_convex_lsi(cfg, sm);
      else if (t == "radial") o = verify_radial();
      else if (t == "muckenhoupt") o = verify_muckenhoupt();
      else if (t == "inf-convolution") o = verify_inf_convolution(cfg, sm);
      else if (t == "kappa") o = verify_kappa();
      else if (t == "weighted-poincare") o = verify_weighted_poincare(cfg, sm);
      else if (t == "lyapunov") o = verify_lyapunov();
    } catch (const SolverError& e) {
      o = {false, {{"error", e.what()}, {"residual", e.residual()}}};
    }
    o.detail["passed"] = o.passed;
    report[t] = o.detail;
    if (!o.passed) s.fail("verify " + t);
  }
  s.write_json("verify.json", report);
}

void write_manifest(const RunConfig& cfg, Session& s, const std::string& status) {
  std::string config_text;
  for (const auto& [k, v] : cfg.entries)
    if (k != "out" && k != "jobs") config_text += k + "=" + v + "\n";
  std::uint64_t h = fnv1a(config_text);
  json j;
  j["subcommand"] = cfg.subcommand;
  j["config"] = json::object();
  for (const auto& [k, v] : cfg.entries) j["config"][k] = v;
  if (s.measure) {
    j["measure_digest"] = measure_digest(*s.measure);
    h = fnv1a(j["measure_digest"].get<std::string>(), h);
  }
  j["inputs_digest"] = hex64(h);
  j["seeds"] = {{"base", cfg.seed}};
  j["generator"] = {{"name", kGeneratorName}, {"version", kGeneratorVersion}};
  j["versions"] = {{"lsicert", kToolVersion}, {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                            std::to_string(EIGEN_MINOR_VERSION)}};
  j["threads"] = kernels::max_threads();
  j["artifacts"] = s.result.artifacts;
  j["failures"] = s.result.failures;
  j["status"] = status;
  j["timestamp"] = utc_timestamp();
  const fs::path p = fs::path(cfg.out_dir) / "manifest.json";
  std::ofstream out(p, std::ios::binary);
  out << j.dump(2) << "\n";
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult failed;
  try {
    if (cfg.jobs > 0) kernels::set_threads(cfg.jobs);
    static const std::vector<std::string> subcommands{"bounds",        "estimate", "decompose", "transport",
                                                      "concentration", "sweep",    "verify-all", "verify"};
    require(std::find(subcommands.begin(), subcommands.end(), cfg.subcommand) != subcommands.end(),
            "unknown subcommand '" + cfg.subcommand + "'");
    Session s(cfg);
    if (cfg.measure_path) s.measure = read_measure_file(*cfg.measure_path);

    if (cfg.subcommand == "bounds") cmd_bounds(cfg, s);
    else if (cfg.subcommand == "estimate") cmd_estimate(cfg, s);
    else if (cfg.subcommand == "decompose") cmd_decompose(cfg, s);
    else if (cfg.subcommand == "transport") cmd_transport(cfg, s);
    else if (cfg.subcommand == "concentration") cmd_concentration(cfg, s);
    else if (cfg.subcommand == "sweep") cmd_sweep(cfg, s);
    else cmd_verify(cfg, s);

    s.result.exit_code = s.result.failures.empty() ? 0 : 2;
    if (!s.result.failures.empty()) {
      std::string report;
      for (const auto& f : s.result.failures) report += f + "\n";
      s.write("failures.txt", report);
      s.result.message = std::to_string(s.result.failures.size()) + " assertion(s) failed";
    }
    write_manifest(cfg, s, s.result.exit_code == 0 ? "pass" : "fail");
    return s.result;
  } catch (const SolverError& e) {
    failed.message = std::string("solver error: ") + e.what() + " (residual " + format_double(e.residual()) + ")";
  } catch (const std::exception& e) {
    failed.message = std::string("error: ") + e.what();
  }
  failed.exit_code = 1;
  return failed;
}

}  // namespace lsicert
