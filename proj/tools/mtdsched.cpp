// Command-line front end.  All work happens behind the C API in mtdsched.h;
// this file only parses flags, moves bytes, and maps error codes to exits.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <mtdsched.h>

namespace {

struct ScenarioHandle {
  mtd_scenario* ptr = nullptr;
  ~ScenarioHandle() { mtd_scenario_free(ptr); }
};

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { mtd_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

int fail(int code) {
  std::cerr << "error: " << mtd_last_error() << "\n";
  return code == MTD_OK ? 1 : code;
}

bool write_file(const std::string& out_dir, const std::string& name,
                const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string path = (std::filesystem::path(out_dir) / name).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  out << content;
  return bool(out);
}

int load_scenario_or_fail(const std::string& path, ScenarioHandle& handle) {
  return mtd_scenario_load(path.c_str(), &handle.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-target-defense switching schedules: analyze configurations, compute "
               "optimal mixes, and verify them by simulating the switched epidemic dynamics"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_given = false;
  double grid_step = 1e-3;
  std::string schedule_path;
  std::string sweep_kind;
  double sweep_min = 0.1;
  double sweep_max = 1.0;
  double sweep_step = 0.1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "Output directory (default: current directory)");
  };

  CLI::App* analyze =
      app.add_subcommand("analyze", "Per-configuration margins and threshold verdicts");
  add_common(analyze);

  CLI::App* optimize =
      app.add_subcommand("optimize", "Optimal switching mix and a schedule spec to run it");
  add_common(optimize);

  CLI::App* simulate =
      app.add_subcommand("simulate", "Integrate the switched dynamics under a schedule spec");
  add_common(simulate);
  simulate->add_option("--schedule", schedule_path, "Schedule spec JSON (from optimize)")
      ->required();
  simulate->add_option("--seed", seed, "Override the schedule spec's RNG seed");

  CLI::App* oracle = app.add_subcommand(
      "oracle", "Cross-check the closed-form optimum against a brute-force grid search");
  add_common(oracle);
  oracle->add_option("--grid-step", grid_step, "Grid resolution (default 1e-3)");

  CLI::App* sweep = app.add_subcommand("sweep", "Emit plot-ready CSV grids");
  add_common(sweep);
  sweep->add_option("--kind", sweep_kind, "pi1_params | pi1_structs | cost_surface")
      ->required();
  sweep->add_option("--min", sweep_min, "Grid lower bound (default 0.1)");
  sweep->add_option("--max", sweep_max, "Grid upper bound (default 1.0)");
  sweep->add_option("--step", sweep_step, "Grid step (default 0.1)");

  CLI11_PARSE(app, argc, argv);
  seed_given = simulate->count("--seed") > 0;

  ScenarioHandle sc;
  if (int rc = load_scenario_or_fail(scenario_path, sc); rc != MTD_OK) return fail(rc);

  if (analyze->parsed()) {
    OwnedString report;
    const int rc = mtd_cmd_analyze(sc.ptr, &report.ptr);
    if (rc != MTD_OK && rc != MTD_ERR_INFEASIBLE) return fail(rc);
    if (!write_file(out_dir, "analyze.json", report.str())) return 1;
    std::cout << report.str();
    if (rc == MTD_ERR_INFEASIBLE) {
      std::cerr << "error: " << mtd_last_error() << "\n";
      return rc;
    }
    return 0;
  }

  if (optimize->parsed()) {
    OwnedString result, schedule, generator;
    const int rc = mtd_cmd_optimize(sc.ptr, &result.ptr, &schedule.ptr, &generator.ptr);
    if (rc != MTD_OK) return fail(rc);
    if (!write_file(out_dir, "result.json", result.str())) return 1;
    if (!write_file(out_dir, "schedule.json", schedule.str())) return 1;
    if (!generator.str().empty() &&
        !write_file(out_dir, "generator.csv", generator.str())) {
      return 1;
    }
    std::cout << result.str();
    return 0;
  }

  if (simulate->parsed()) {
    std::ifstream in(schedule_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read schedule spec " << schedule_path << "\n";
      return MTD_ERR_VALIDATION;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    OwnedString summary, trajectory, schedule;
    const int rc = mtd_cmd_simulate(sc.ptr, buf.str().c_str(), seed_given ? 1 : 0, seed,
                                    &summary.ptr, &trajectory.ptr, &schedule.ptr, nullptr);
    if (rc != MTD_OK) return fail(rc);
    if (!write_file(out_dir, "summary.json", summary.str())) return 1;
    if (!write_file(out_dir, "trajectory.csv", trajectory.str())) return 1;
    if (!write_file(out_dir, "schedule.csv", schedule.str())) return 1;
    std::cout << summary.str();
    return 0;
  }

  if (oracle->parsed()) {
    OwnedString report;
    const int rc = mtd_cmd_oracle(sc.ptr, grid_step, &report.ptr);
    if (rc != MTD_OK && rc != MTD_ERR_NUMERICAL) return fail(rc);
    if (!write_file(out_dir, "oracle.json", report.str())) return 1;
    std::cout << report.str();
    if (rc == MTD_ERR_NUMERICAL) {
      std::cerr << "error: " << mtd_last_error() << "\n";
      return rc;
    }
    return 0;
  }

  // sweep
  OwnedString csv;
  const int rc = mtd_sweep(sc.ptr, sweep_kind.c_str(), sweep_min, sweep_max, sweep_step,
                           &csv.ptr);
  if (rc != MTD_OK) return fail(rc);
  if (!write_file(out_dir, "sweep_" + sweep_kind + ".csv", csv.str())) return 1;
  std::cout << "wrote sweep_" << sweep_kind << ".csv (" << csv.str().size() << " bytes)\n";
  return 0;
}
