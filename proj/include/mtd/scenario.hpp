#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtd/model.hpp"
#include "mtd/opt_params.hpp"
#include "mtd/switching.hpp"

namespace mtd {

// Simulation block of a scenario file.  dt/horizon/initial_infection are
// required by the simulate command; the rest default as noted.
struct SimulationSettings {
  double dt = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  double initial_infection = 0.0;   // uniform initial probability per node
  double resolution = 1.0;          // fixed-mix scheduler sojourn scale
  int output_stride = 1;
  double convergence_eps = 1e-4;
  double convergence_window = 0.0;  // 0 -> horizon / 10
};

// In-memory form of a scenario file.  JSON schema (fail-closed: unknown
// fields are rejected with their path):
//   {
//     "version": 1,
//     "mode": "params" | "structures",
//     "delta": number,                       (optional)
//     "pi1": number,                         (optional)
//     "cost": {"kind": "affine" | "quadratic_shifted" | "sqrt_shifted",
//              "params": [p0, p1],
//              "shape": "convex" | "concave"},            (optional)
//            | {"kind": "table", "points": [[mu, cost], ...], ...}
//     "constants": {"a": .., "b": .., "c": ..},           (optional)
//     "simulation": {"dt", "horizon", "seed", "initial_infection",
//                    "resolution", "output_stride", "convergence_eps",
//                    "convergence_window"},               (optional)
//     "configurations": [{"id": int, "beta": .., "gamma": ..,
//                         exactly one of:
//                           "lambda1": number
//                           "graph_file": path [, "directed": bool]
//                           "generator": {"kind": "complete"|"star"|"path"|
//                                         "erdos_renyi", ...}}]
//   }
// Structure-switching scenarios (mode "structures") must share beta and gamma
// across configurations.  Paths are resolved relative to the scenario file.
struct Scenario {
  enum class Mode { Params, Structures };

  int version = 1;
  Mode mode = Mode::Params;
  std::optional<double> delta;
  std::optional<double> pi1;
  std::optional<CostFunction> cost;
  ShapeHint shape = ShapeHint::None;
  GeneratorConstants constants;     // delta is filled from the top-level field
  bool has_constants = false;
  std::optional<SimulationSettings> simulation;
  std::vector<Configuration> configurations;
};

// Parses scenario JSON; `base_dir` anchors relative graph_file paths.
// Throws ValidationError with a field path on any schema violation.
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

// Per-configuration threshold report.  `any_satisfying` is false when no
// configuration converges on its own (exit code 3 at the CLI).
struct AnalyzeOutcome {
  std::string report_json;
  bool any_satisfying = false;
};
AnalyzeOutcome cmd_analyze(const Scenario& s);

// Optimizer front end.  The branch follows the inputs: cost + pi1 present ->
// minimum cost, otherwise maximum violator occupancy.  Emits a result record
// plus a scheduler spec consumable by cmd_simulate; structure mode also emits
// the generator matrix as CSV.
struct OptimizeOutcome {
  std::string result_json;
  std::string schedule_json;
  std::string generator_csv;        // empty in params mode
};
OptimizeOutcome cmd_optimize(const Scenario& s);

// Runs the switched simulation described by a scheduler spec produced by
// cmd_optimize.  Every configuration referenced by the spec must carry an
// explicit structure.  `seed_override` replaces the spec's seed when set.
struct SimulateOutcome {
  std::string summary_json;
  std::string trajectory_csv;
  std::string schedule_csv;
  bool converged = false;
};
SimulateOutcome cmd_simulate(const Scenario& s, const std::string& schedule_spec_json,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

// Closed-form optimizer vs grid oracle, side by side.  `agree` is false when
// the cost difference exceeds one grid step's cost variation (exit code 4 at
// the CLI).
struct OracleOutcome {
  std::string report_json;
  bool agree = false;
};
OracleOutcome cmd_oracle(const Scenario& s, double grid_step);

// Plot-data grids as CSV.
// pi1 sweeps: rows over (-mu_1, mu_N) in [lo, hi]^2 at the given step; the
// params variant uses the mix bound, the structs variant the generator bound
// with the scenario's constants.  Columns: mu1_abs,mu_n,pi1_star.
std::string sweep_pi1_params(const Scenario& s, double lo, double hi, double step);
std::string sweep_pi1_structs(const Scenario& s, double lo, double hi, double step);
// Cost surface over (pi_2, pi_3) for a four-configuration parameter scenario
// with cost and pi1 set.  Columns: pi2,pi3,pi4,cost,feasible.
std::string sweep_cost_surface(const Scenario& s, double step);

}  // namespace mtd
