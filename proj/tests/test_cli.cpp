// End-to-end checks of the command-line tool: spawn the real binary, inspect
// exit codes and the files it leaves behind.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include <sys/wait.h>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kExe = MTD_CLI_PATH;
const std::string kScenarioDir = MTD_SCENARIO_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mtdsched_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the CLI with the given arguments, capturing stdout/stderr next to the
// other outputs.  Returns the process exit status.
int run_cli(const std::string& args, const fs::path& log_dir) {
  const std::string cmd = "\"" + kExe + "\" " + args + " > \"" +
                          (log_dir / "stdout.txt").string() + "\" 2> \"" +
                          (log_dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("cli: --help exits 0") {
  const fs::path dir = fresh_dir("help");
  CHECK(run_cli("--help", dir) == 0);
  CHECK(slurp(dir / "stdout.txt").find("analyze") != std::string::npos);
}

TEST_CASE("cli: analyze writes a report, prints it, and exits 0") {
  const fs::path dir = fresh_dir("analyze_ok");
  const int rc = run_cli("analyze --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 0);
  auto report = json::parse(slurp(dir / "analyze.json"));
  CHECK(report["command"] == "analyze");
  CHECK(report["any_satisfying"] == true);
  REQUIRE(report["configurations"].size() == 4);
  CHECK(report["configurations"][0]["verdict"] == "may_not_converge");
  CHECK(report["configurations"][1]["verdict"] == "converges");
  // stdout carries the same report verbatim.
  CHECK(slurp(dir / "stdout.txt") == slurp(dir / "analyze.json"));
}

TEST_CASE("cli: analyze exits 3 when every configuration violates, report still written") {
  const fs::path dir = fresh_dir("analyze_infeasible");
  write_text(dir / "scenario.json", R"({
    "version": 1, "mode": "params", "delta": 0.0,
    "configurations": [
      {"id": 1, "beta": 0.1, "gamma": 0.004, "lambda1": 100.0},
      {"id": 2, "beta": 0.2, "gamma": 0.004, "lambda1": 100.0}
    ]})");
  const int rc = run_cli("analyze --scenario \"" + (dir / "scenario.json").string() +
                             "\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 3);
  auto report = json::parse(slurp(dir / "analyze.json"));
  CHECK(report["any_satisfying"] == false);
  CHECK(slurp(dir / "stderr.txt").find("error:") != std::string::npos);
}

TEST_CASE("cli: optimize on a parameter scenario writes result and schedule only") {
  const fs::path dir = fresh_dir("optimize_params");
  const int rc = run_cli("optimize --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 0);
  auto result = json::parse(slurp(dir / "result.json"));
  CHECK(result["command"] == "optimize");
  CHECK(result["objective"] == "min_cost");
  CHECK(result["cost"].get<double>() == doctest::Approx(14.767802928640013).epsilon(1e-12));
  auto spec = json::parse(slurp(dir / "schedule.json"));
  CHECK(spec["scheduler"] == "fixed_mix");
  // Fixed-mix schedules carry no rate matrix, so no generator file appears.
  CHECK_FALSE(fs::exists(dir / "generator.csv"));
}

TEST_CASE("cli: optimize on a structures scenario also writes the generator") {
  const fs::path dir = fresh_dir("optimize_structs");
  const int rc = run_cli("optimize --scenario \"" + kScenarioDir +
                             "/structs_demo.json\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 0);
  auto result = json::parse(slurp(dir / "result.json"));
  CHECK(result["pi1_star"].get<double>() ==
        doctest::Approx(0.14343706742596485).epsilon(1e-12));
  auto spec = json::parse(slurp(dir / "schedule.json"));
  CHECK(spec["scheduler"] == "markov_generator");
  CHECK_FALSE(slurp(dir / "generator.csv").empty());
}

TEST_CASE("cli: optimize without pi1 for a cost objective exits 2") {
  const fs::path dir = fresh_dir("optimize_bad");
  write_text(dir / "scenario.json", R"({
    "version": 1, "mode": "params", "delta": 0.0,
    "cost": {"kind": "affine", "params": [1.0, 0.0]},
    "configurations": [
      {"id": 1, "beta": 0.1, "gamma": 0.004, "lambda1": 100.0},
      {"id": 2, "beta": 0.7, "gamma": 0.004, "lambda1": 100.0}
    ]})");
  const int rc = run_cli("optimize --scenario \"" + (dir / "scenario.json").string() +
                             "\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 2);
  CHECK(slurp(dir / "stderr.txt").find("pi1") != std::string::npos);
}

TEST_CASE("cli: optimize then simulate round trip converges") {
  const fs::path dir = fresh_dir("roundtrip");
  write_text(dir / "scenario.json", R"({
    "version": 1, "mode": "params", "delta": 0.1,
    "simulation": {"dt": 0.1, "horizon": 400.0, "seed": 99, "initial_infection": 0.2,
                   "resolution": 1.0, "output_stride": 10, "convergence_eps": 1e-3,
                   "convergence_window": 50.0},
    "configurations": [
      {"id": 1, "beta": 0.2, "gamma": 0.03, "generator": {"kind": "complete", "n": 10}},
      {"id": 2, "beta": 0.8, "gamma": 0.01, "generator": {"kind": "complete", "n": 10}}
    ]})");
  const std::string scenario_arg = "--scenario \"" + (dir / "scenario.json").string() + "\"";

  const fs::path opt_dir = fresh_dir("roundtrip_opt");
  REQUIRE(run_cli("optimize " + scenario_arg + " --out \"" + opt_dir.string() + "\"",
                  opt_dir) == 0);
  const fs::path schedule = opt_dir / "schedule.json";
  REQUIRE(fs::exists(schedule));

  const fs::path sim_dir = fresh_dir("roundtrip_sim");
  const int rc = run_cli("simulate " + scenario_arg + " --schedule \"" + schedule.string() +
                             "\" --out \"" + sim_dir.string() + "\"",
                         sim_dir);
  CHECK(rc == 0);
  auto summary = json::parse(slurp(sim_dir / "summary.json"));
  CHECK(summary["converged"] == true);
  CHECK(summary["final_sup_norm"].get<double>() < 1e-3);
  CHECK(slurp(sim_dir / "trajectory.csv").rfind("t,config_id,sup_norm,mean_infection", 0) == 0);
  CHECK(slurp(sim_dir / "schedule.csv").rfind("state,start,duration", 0) == 0);

  // A seed override changes the realized schedule and is echoed in the summary.
  const fs::path sim_dir2 = fresh_dir("roundtrip_sim_seeded");
  REQUIRE(run_cli("simulate " + scenario_arg + " --schedule \"" + schedule.string() +
                      "\" --seed 777 --out \"" + sim_dir2.string() + "\"",
                  sim_dir2) == 0);
  auto summary2 = json::parse(slurp(sim_dir2 / "summary.json"));
  CHECK(summary2["seed"] == 777);
  CHECK(slurp(sim_dir2 / "schedule.csv") != slurp(sim_dir / "schedule.csv"));
}

TEST_CASE("cli: simulate with a missing schedule file exits 2") {
  const fs::path dir = fresh_dir("missing_schedule");
  const int rc = run_cli("simulate --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --schedule \"" +
                             (dir / "nope.json").string() + "\" --out \"" + dir.string() +
                             "\"",
                         dir);
  CHECK(rc == 2);
  CHECK(slurp(dir / "stderr.txt").find("cannot read schedule spec") != std::string::npos);
}

TEST_CASE("cli: oracle agrees with the closed form and writes oracle.json") {
  const fs::path dir = fresh_dir("oracle");
  const int rc = run_cli("oracle --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 0);
  auto report = json::parse(slurp(dir / "oracle.json"));
  CHECK(report["command"] == "oracle");
  CHECK(report["agree"] == true);
  CHECK(report["oracle_cost"].get<double>() >=
        report["closed_cost"].get<double>() - 1e-9);
}

TEST_CASE("cli: sweep emits a plot-ready csv") {
  const fs::path dir = fresh_dir("sweep");
  const int rc = run_cli("sweep --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --kind pi1_params --min 0.1 --max 0.5 "
                             "--step 0.1 --out \"" +
                             dir.string() + "\"",
                         dir);
  CHECK(rc == 0);
  const std::string csv = slurp(dir / "sweep_pi1_params.csv");
  CHECK(csv.rfind("mu1_abs,mu_n,pi1_star", 0) == 0);
  CHECK(line_count(csv) == 26);  // header + 5x5 grid
  CHECK(slurp(dir / "stdout.txt").find("wrote sweep_pi1_params.csv") != std::string::npos);
}

TEST_CASE("cli: unknown sweep kind exits 2") {
  const fs::path dir = fresh_dir("sweep_bad");
  const int rc = run_cli("sweep --scenario \"" + kScenarioDir +
                             "/params_convex.json\" --kind volume --out \"" + dir.string() +
                             "\"",
                         dir);
  CHECK(rc == 2);
  CHECK(slurp(dir / "stderr.txt").find("error:") != std::string::npos);
}

TEST_CASE("cli: missing scenario file exits 2") {
  const fs::path dir = fresh_dir("missing_scenario");
  const int rc = run_cli("analyze --scenario \"" + (dir / "absent.json").string() +
                             "\" --out \"" + dir.string() + "\"",
                         dir);
  CHECK(rc == 2);
  CHECK(slurp(dir / "stderr.txt").find("error:") != std::string::npos);
}

TEST_CASE("cli: argument errors exit nonzero") {
  const fs::path dir = fresh_dir("usage");
  CHECK(run_cli("", dir) != 0);                  // a subcommand is required
  CHECK(run_cli("analyze", dir) != 0);           // --scenario is required
  CHECK(run_cli("analyze --frobnicate", dir) != 0);
}
