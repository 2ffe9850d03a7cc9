#include "lsicert/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Functional-inequality constants for Gaussian-smoothed measures"};
  std::string subcommand, check, config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  app.add_option("subcommand", subcommand,
                 "bounds | estimate | decompose | transport | concentration | sweep | verify-all | verify")
      ->required();
  app.add_option("check", check, "verify target (verify only)");
  app.add_option("--config", config_path, "key = value run configuration");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--jobs", jobs, "worker threads");
  CLI11_PARSE(app, argc, argv);

  lsicert::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = lsicert::load_config(config_path);
    cfg.subcommand = subcommand;
    if (!check.empty()) {
      if (subcommand != "verify") {
        std::cerr << "error: a check name is only accepted by 'verify'\n";
        return 1;
      }
      cfg.check = check;
    }
    if (subcommand == "verify-all") cfg.check.clear();
    if (!out_dir.empty()) lsicert::apply_config_entry(cfg, "out", out_dir);
    if (seed) lsicert::apply_config_entry(cfg, "seed", std::to_string(*seed));
    if (jobs) lsicert::apply_config_entry(cfg, "jobs", std::to_string(*jobs));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const lsicert::RunResult r = lsicert::run(cfg);
  if (r.exit_code == 1) {
    std::cerr << r.message << "\n";
    return 1;
  }
  for (const auto& a : r.artifacts) std::cout << cfg.out_dir << "/" << a << "\n";
  for (const auto& f : r.failures) std::cerr << "FAIL " << f << "\n";
  if (!r.message.empty()) std::cerr << r.message << "\n";
  return r.exit_code;
}
