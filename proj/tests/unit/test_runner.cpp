#include "lsicert/runner.hpp"

#include "lsicert/common.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace lsicert;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lsicert_runner_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_timestamp(const std::string& s) {
  std::istringstream in(s);
  std::string line, out;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(LSICERT_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# lattice\n"
      "subcommand = bounds\n"
      "delta = 0.5, 1, 2\n"
      "R = 0, 1\n"
      "d = 1,3\n"
      "seed = 17\n"
      "t_grid = 1, 2\n");
  const RunConfig cfg = parse_config(in);
  CHECK(cfg.subcommand == "bounds");
  CHECK(cfg.deltas == std::vector<double>{0.5, 1, 2});
  CHECK(cfg.radii == std::vector<double>{0, 1});
  CHECK(cfg.dims == std::vector<int>{1, 3});
  CHECK(cfg.seed == 17);
  CHECK(cfg.t_grid == std::vector<double>{1, 2});

  RunConfig c;
  CHECK_THROWS_AS(apply_config_entry(c, "colour", "blue"), InputError);
  CHECK_THROWS_AS(apply_config_entry(c, "delta", "abc"), InputError);
  std::istringstream bad("delta 1\n");
  CHECK_THROWS_AS(parse_config(bad), InputError);
  CHECK_THROWS_AS(load_config("/nonexistent/lsicert.cfg"), InputError);

  CHECK(schedule_count("d", 4) == 4);
  CHECK(schedule_count("2d", 4) == 8);
  CHECK(schedule_count("d^2", 4) == 16);
  CHECK(schedule_count("7", 4) == 7);
  CHECK_THROWS_AS(schedule_count("d^3", 4), InputError);
}

TEST_CASE("bounds table over a lattice") {
  const fs::path out = scratch("bounds");
  RunConfig cfg;
  cfg.subcommand = "bounds";
  cfg.deltas = {0.5, 1, 2};
  cfg.radii = {0, 0.5, 1};
  cfg.out_dir = out.string();
  const RunResult r = run(cfg);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "bounds.csv"));
  REQUIRE(fs::exists(out / "manifest.json"));
  const int rows = count_lines(out / "bounds.csv") - 1;
  CHECK(rows > 0);
  CHECK(rows % 9 == 0);
  CHECK(slurp(out / "bounds.csv").rfind("name,delta,R,d,N,value,valid,dimension_free,source", 0) == 0);
}

TEST_CASE("repeated runs give identical artifacts") {
  const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
  for (const auto& dir : {a, b}) {
    RunConfig cfg;
    cfg.subcommand = "bounds";
    cfg.deltas = {0.7, 1.3};
    cfg.out_dir = dir.string();
    cfg.entries = {{"delta", "0.7,1.3"}};
    REQUIRE(run(cfg).exit_code == 0);
  }
  CHECK(slurp(a / "bounds.csv") == slurp(b / "bounds.csv"));
  CHECK(without_timestamp(slurp(a / "manifest.json")) == without_timestamp(slurp(b / "manifest.json")));
}

TEST_CASE("verify subcommand") {
  const fs::path out = scratch("verify");
  RunConfig cfg;
  cfg.subcommand = "verify";
  cfg.check = "poincare";
  cfg.out_dir = out.string();
  const RunResult r = run(cfg);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "verify.json"));

  cfg.check = "no-such-check";
  CHECK(run(cfg).exit_code == 1);
  CHECK(verify_checks().size() == 15);
}

TEST_CASE("errors map to exit code 1") {
  const fs::path out = scratch("errors");
  RunConfig cfg;
  cfg.subcommand = "estimate";
  cfg.out_dir = out.string();
  const fs::path bad = out / "bad.txt";
  std::ofstream(bad) << "1 2 0.5\n0.3 1.0\n";
  cfg.measure_path = bad.string();
  const RunResult r = run(cfg);
  CHECK(r.exit_code == 1);
  CHECK_FALSE(r.message.empty());

  RunConfig unknown;
  unknown.subcommand = "frobnicate";
  unknown.out_dir = out.string();
  CHECK(run(unknown).exit_code == 1);

  RunConfig blocked;
  blocked.subcommand = "bounds";
  const fs::path file = out / "not_a_dir";
  std::ofstream(file) << "x";
  blocked.out_dir = (file / "sub").string();
  CHECK(run(blocked).exit_code == 1);
}

TEST_CASE("command line entry point") {
  const fs::path out = scratch("cli");
  const fs::path cfg = out / "run.cfg";
  std::ofstream(cfg) << "delta = 1\nR = 0.5\n";
  CHECK(run_cli("bounds --config " + cfg.string() + " --out " + (out / "b").string()) == 0);
  CHECK(fs::exists(out / "b" / "bounds.csv"));
  CHECK(run_cli("verify lyapunov --out " + (out / "v").string()) == 0);
  CHECK(run_cli("frobnicate --out " + (out / "x").string()) == 1);
  CHECK(run_cli("bounds --config " + (out / "missing.cfg").string()) == 1);
}
