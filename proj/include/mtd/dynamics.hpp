#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mtd/model.hpp"
#include "mtd/switching.hpp"

namespace mtd {

// Per-node compromise probabilities i in [0,1]^n at a point in time.
struct InfectionState {
  std::vector<double> values;
  double time = 0.0;
};

// Infection pressure on each node v: xi_v = 1 - prod_{u attacks v} (1 - gamma * i_u).
// Always bounded above by the linearization gamma * sum_{u attacks v} i_u.
std::vector<double> infection_pressure(const InfectionState& state,
                                       const AttackDefenseStructure& structure, double gamma);

struct TrajectorySample {
  double t = 0.0;
  int config_id = 0;       // configuration whose dynamics produced this state
  double sup_norm = 0.0;   // max_v i_v
  double mean = 0.0;       // mean_v i_v
  std::vector<double> state;  // full vector only when requested
};

struct Trajectory {
  std::vector<TrajectorySample> samples;            // strictly increasing times
  std::vector<std::pair<int, double>> occupancy;    // (config id, time fraction), sums to 1
  double horizon = 0.0;
  double dt = 0.0;
};

struct IntegrationOptions {
  int output_stride = 1;      // record every stride-th committed step
  bool record_state = false;  // keep full per-node vectors in the samples
};

// Largest stable step for the given configurations:
// 0.1 / max(beta, gamma * max in-degree) over the set.  Integration rejects
// dt above this bound.
double stability_dt_bound(std::span<const Configuration> configs);

// Integrates the master equation
//   di_v/dt = xi_v(t) (1 - i_v) - beta i_v
// with classic fourth-order Runge-Kutta steps of size dt; states are clamped
// to [0,1] after each committed step and switch instants realign the step so
// no step straddles a configuration change.  The all-zero state is an exact
// fixed point and is preserved bitwise.
//
// integrate_static runs one configuration for the whole horizon; it is
// implemented as a single-sojourn schedule, so a one-state scheduler and a
// static run produce bitwise-identical trajectories at the same dt.
Trajectory integrate_static(const Configuration& config, const InfectionState& initial,
                            double dt, double horizon, const IntegrationOptions& options = {});

// Runs the switched dynamics: the scheduler's state indices select into
// `configs` (state r -> configs[r]).  Every configuration must carry an
// explicit structure over the same node set.
Trajectory simulate_switched(std::span<const Configuration> configs, Scheduler& scheduler,
                             const InfectionState& initial, double dt, double horizon,
                             const IntegrationOptions& options = {});

// Same, but over a pre-sampled schedule (used by the higher-level drivers so
// the realized schedule can also be exported).
Trajectory run_schedule(std::span<const Configuration> configs,
                        std::span<const SojournEntry> schedule, const InfectionState& initial,
                        double dt, double horizon, const IntegrationOptions& options = {});

// True when every recorded sample in the trailing window
// [horizon - window, horizon] keeps sup_norm below eps.  window must lie in
// (0, horizon].
bool clean_equilibrium_check(const Trajectory& trajectory, double eps, double window);

// CSV dump: t,config_id,sup_norm,mean_infection[,i_1..i_n when states were
// recorded].
std::string trajectory_to_csv(const Trajectory& trajectory);

}  // namespace mtd
