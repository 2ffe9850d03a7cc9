#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsicert {

/// Declarative run description, read from `key = value` lines. Lists are
/// comma separated. Unknown keys are rejected.
struct RunConfig {
  std::string subcommand;
  std::string check;  // verify target, empty for all
  std::optional<std::string> measure_path;
  std::vector<double> deltas{1.0};
  std::vector<double> radii{1.0};
  std::vector<int> dims{1};
  std::vector<int> counts;  // N lattice for the bounds table
  std::optional<int> grid_nodes;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::optional<double> c_prime;  // unset: report the smallest admissible c'
  double tolerance = 0.02;  // relative slack for bound domination
  int lsi_iterations = 200;
  std::size_t tail_samples = 1000000;
  std::vector<double> t_grid{0.5, 1.0, 2.0, 3.0, 4.0};
  int transport_nodes = 24;
  int transport_members = 20;
  std::string cost = "l4sq";
  int sweep_trials = 3;
  std::string n_schedule = "d";  // d, 2d, d^2 or a fixed integer
  int jobs = 0;
  /// Keys in file order as given, for the manifest.
  std::vector<std::pair<std::string, std::string>> entries;
};

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Known verify targets in execution order.
const std::vector<std::string>& verify_checks();

struct RunResult {
  int exit_code = 0;  // 0 pass, 2 assertion failure, 1 error
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;
  std::string message;
};

/// Executes one subcommand and writes its artifacts plus manifest.json into
/// cfg.out_dir. Errors are reported through the exit code, not thrown.
RunResult run(const RunConfig& cfg);

/// Evaluates the N schedule at dimension d.
int schedule_count(const std::string& schedule, int d);

}  // namespace lsicert
