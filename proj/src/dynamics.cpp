#include "mtd/dynamics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "mtd/errors.hpp"

namespace mtd {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// 1 - prod drops all precision once every gamma*i_u sits below machine
// epsilon (the pressure then reads exactly zero and the infection looks
// artificially extinct), so near prod == 1 the product is redone in log
// space.  Factors are provably positive in that regime, but the loop still
// bails out defensively if one is not.
template <typename Attackers>
double complement_product_rescue(const Attackers& attackers, double gamma,
                                 const std::vector<double>& i, double plain) {
  double sum = 0.0;
  for (int u : attackers) {
    const double a = -gamma * i[u];
    if (a <= -1.0) return plain;
    sum += std::log1p(a);
  }
  return -std::expm1(sum);
}

// di_v/dt under one configuration.  Stage states of the Runge-Kutta scheme may
// poke slightly outside [0,1]; the product form tolerates that, so no stage
// clamping (which would spoil the integrator's smoothness and order).
void derivative(const AttackDefenseStructure& g, double beta, double gamma,
                const std::vector<double>& i, std::vector<double>& out) {
  const int n = g.node_count();
  for (int v = 0; v < n; ++v) {
    double prod = 1.0;
    for (int u : g.attackers_of(v)) prod *= 1.0 - gamma * i[u];
    double xi = 1.0 - prod;
    if (prod > 1.0 - 1e-8) xi = complement_product_rescue(g.attackers_of(v), gamma, i, xi);
#ifndef NDEBUG
    double linear = 0.0;
    for (int u : g.attackers_of(v)) linear += i[u];
    assert(xi <= gamma * linear + 1e-12);
#endif
    out[v] = xi * (1.0 - i[v]) - beta * i[v];
  }
}

struct StepWorkspace {
  std::vector<double> k1, k2, k3, k4, stage;
};

void rk4_step(const AttackDefenseStructure& g, double beta, double gamma, double dt,
              std::vector<double>& x, StepWorkspace& w) {
  const int n = static_cast<int>(x.size());
  derivative(g, beta, gamma, x, w.k1);
  for (int v = 0; v < n; ++v) w.stage[v] = x[v] + 0.5 * dt * w.k1[v];
  derivative(g, beta, gamma, w.stage, w.k2);
  for (int v = 0; v < n; ++v) w.stage[v] = x[v] + 0.5 * dt * w.k2[v];
  derivative(g, beta, gamma, w.stage, w.k3);
  for (int v = 0; v < n; ++v) w.stage[v] = x[v] + dt * w.k3[v];
  derivative(g, beta, gamma, w.stage, w.k4);
  for (int v = 0; v < n; ++v) {
    double next = x[v] + dt / 6.0 * (w.k1[v] + 2.0 * w.k2[v] + 2.0 * w.k3[v] + w.k4[v]);
    x[v] = std::clamp(next, 0.0, 1.0);
  }
}

}  // namespace

std::vector<double> infection_pressure(const InfectionState& state,
                                       const AttackDefenseStructure& structure, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("infection pressure: gamma must lie in (0, 1] (got " + fmt(gamma) +
                          ")");
  }
  const int n = structure.node_count();
  if (static_cast<int>(state.values.size()) != n) {
    throw ValidationError("infection pressure: state has " +
                          std::to_string(state.values.size()) + " entries but the structure " +
                          std::to_string(n) + " nodes");
  }
  std::vector<double> xi(n);
  for (int v = 0; v < n; ++v) {
    double prod = 1.0;
    double linear = 0.0;
    for (int u : structure.attackers_of(v)) {
      const double p = state.values[u];
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("infection pressure: node " + std::to_string(u) +
                              " probability out of [0, 1] (" + fmt(p) + ")");
      }
      prod *= 1.0 - gamma * p;
      linear += p;
    }
    xi[v] = 1.0 - prod;
    if (prod > 1.0 - 1e-8) {
      xi[v] = complement_product_rescue(structure.attackers_of(v), gamma, state.values, xi[v]);
    }
    assert(xi[v] <= gamma * linear + 1e-12);
    (void)linear;
  }
  return xi;
}

double stability_dt_bound(std::span<const Configuration> configs) {
  if (configs.empty()) {
    throw ValidationError("stability bound: no configurations");
  }
  double worst_rate = 0.0;
  for (const auto& c : configs) {
    const auto* g = c.structure_or_null();
    if (!g) {
      throw ValidationError("configuration id=" + std::to_string(c.id) +
                            ": simulation requires an explicit structure (bare lambda1 is "
                            "enough for analysis only); provide an edge list or a generator "
                            "recipe");
    }
    worst_rate = std::max(worst_rate, std::max(c.beta, c.gamma * g->max_in_degree()));
  }
  return 0.1 / worst_rate;
}

Trajectory run_schedule(std::span<const Configuration> configs,
                        std::span<const SojournEntry> schedule, const InfectionState& initial,
                        double dt, double horizon, const IntegrationOptions& options) {
  if (configs.empty()) {
    throw ValidationError("simulation: no configurations");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("simulation: horizon must be a positive real (got " + fmt(horizon) +
                          "); a zero-horizon run would leave the verdict indeterminate");
  }
  if (schedule.empty()) {
    throw ValidationError("simulation: empty schedule");
  }
  if (options.output_stride < 1) {
    throw ValidationError("simulation: output_stride must be >= 1");
  }

  const auto* g0 = configs[0].structure_or_null();
  if (!g0) {
    throw ValidationError("configuration id=" + std::to_string(configs[0].id) +
                          ": simulation requires an explicit structure; provide an edge list "
                          "or a generator recipe");
  }
  const int n = g0->node_count();
  for (const auto& c : configs) {
    const auto* g = c.structure_or_null();
    if (!g) {
      throw ValidationError("configuration id=" + std::to_string(c.id) +
                            ": simulation requires an explicit structure; provide an edge "
                            "list or a generator recipe");
    }
    if (g->node_count() != n) {
      throw ValidationError("simulation: configurations disagree on the node set (" +
                            std::to_string(n) + " vs " + std::to_string(g->node_count()) +
                            " nodes at id=" + std::to_string(c.id) + ")");
    }
  }
  if (static_cast<int>(initial.values.size()) != n) {
    throw ValidationError("simulation: initial state has " +
                          std::to_string(initial.values.size()) + " entries but the structures " +
                          std::to_string(n) + " nodes");
  }
  for (double v : initial.values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("simulation: initial probability out of [0, 1] (" + fmt(v) + ")");
    }
  }

  const double bound = stability_dt_bound(configs);
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12)) {
    throw ValidationError("simulation: dt=" + fmt(dt) +
                          " violates the stability bound 0.1/max(beta, gamma*degree) = " +
                          fmt(bound));
  }

  Trajectory traj;
  traj.horizon = horizon;
  traj.dt = dt;

  std::vector<double> x = initial.values;
  StepWorkspace w;
  w.k1.resize(n);
  w.k2.resize(n);
  w.k3.resize(n);
  w.k4.resize(n);
  w.stage.resize(n);

  std::map<int, double> occupancy;  // config id -> accumulated time

  auto record = [&](double t, int config_id) {
    TrajectorySample s;
    s.t = t;
    s.config_id = config_id;
    double sup = 0.0, sum = 0.0;
    for (double v : x) {
      sup = std::max(sup, v);
      sum += v;
    }
    s.sup_norm = sup;
    s.mean = sum / n;
    if (options.record_state) s.state = x;
    traj.samples.push_back(std::move(s));
  };

  for (const auto& sojourn : schedule) {
    if (sojourn.state < 0 || sojourn.state >= static_cast<int>(configs.size())) {
      throw ValidationError("simulation: schedule references state " +
                            std::to_string(sojourn.state) + " but only " +
                            std::to_string(configs.size()) + " configurations exist");
    }
  }
  if (std::abs(schedule.front().start) > 1e-9) {
    throw ValidationError("simulation: schedule must start at time 0 (got " +
                          fmt(schedule.front().start) + ")");
  }

  long long committed_steps = 0;
  double t = 0.0;
  bool recorded_final = false;

  record(0.0, configs[schedule.front().state].id);

  for (const auto& sojourn : schedule) {
    if (t >= horizon) break;
    if (std::abs(sojourn.start - t) > 1e-6) {
      throw ValidationError("simulation: schedule is not contiguous (sojourn starts at " +
                            fmt(sojourn.start) + " but previous one ended at " + fmt(t) + ")");
    }
    const double seg_end = std::min(sojourn.start + sojourn.duration, horizon);
    const double seg_len = seg_end - t;
    if (!(seg_len > 0.0)) continue;

    const Configuration& cfg = configs[sojourn.state];
    const AttackDefenseStructure& g = *cfg.structure_or_null();
    const double seg_start = t;

    const long long full_steps = static_cast<long long>(std::floor(seg_len / dt + 1e-9));
    const double remainder = seg_len - static_cast<double>(full_steps) * dt;

    for (long long s = 0; s < full_steps; ++s) {
      rk4_step(g, cfg.beta, cfg.gamma, dt, x, w);
      t = seg_start + static_cast<double>(s + 1) * dt;
      ++committed_steps;
      if (committed_steps % options.output_stride == 0 && t < seg_end) {
        record(t, cfg.id);
      }
    }
    if (remainder > 1e-9 * dt) {
      rk4_step(g, cfg.beta, cfg.gamma, remainder, x, w);
      ++committed_steps;
    }
    t = seg_end;
    occupancy[cfg.id] += seg_len;
    if (t >= horizon) {
      record(t, cfg.id);
      recorded_final = true;
      break;
    }
    // segment boundary: record the state the finished configuration reached
    record(t, cfg.id);
  }

  if (t < horizon) {
    throw ValidationError("simulation: schedule covers only [0, " + fmt(t) +
                          ") of the requested horizon " + fmt(horizon));
  }
  if (!recorded_final) {
    record(horizon, traj.samples.back().config_id);
  }

  for (const auto& [id, time] : occupancy) {
    traj.occupancy.push_back({id, time / horizon});
  }
  return traj;
}

Trajectory integrate_static(const Configuration& config, const InfectionState& initial,
                            double dt, double horizon, const IntegrationOptions& options) {
  const SojournEntry whole{0, 0.0, horizon};
  return run_schedule({&config, 1}, {&whole, 1}, initial, dt, horizon, options);
}

Trajectory simulate_switched(std::span<const Configuration> configs, Scheduler& scheduler,
                             const InfectionState& initial, double dt, double horizon,
                             const IntegrationOptions& options) {
  if (scheduler.state_count() != static_cast<int>(configs.size())) {
    throw ValidationError("simulation: scheduler covers " +
                          std::to_string(scheduler.state_count()) +
                          " states but " + std::to_string(configs.size()) +
                          " configurations were given");
  }
  const auto schedule = scheduler.sample(horizon);
  return run_schedule(configs, schedule, initial, dt, horizon, options);
}

bool clean_equilibrium_check(const Trajectory& trajectory, double eps, double window) {
  if (!(eps > 0.0)) {
    throw ValidationError("equilibrium check: eps must be > 0 (got " + fmt(eps) + ")");
  }
  if (!(window > 0.0 && window <= trajectory.horizon)) {
    throw ValidationError("equilibrium check: window must lie in (0, horizon] (window=" +
                          fmt(window) + ", horizon=" + fmt(trajectory.horizon) + ")");
  }
  const double from = trajectory.horizon - window;
  bool saw_sample = false;
  for (const auto& s : trajectory.samples) {
    if (s.t < from) continue;
    saw_sample = true;
    if (!(s.sup_norm < eps)) return false;
  }
  if (!saw_sample) {
    throw ValidationError("equilibrium check: no samples recorded in the trailing window");
  }
  return true;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  const bool with_state =
      !trajectory.samples.empty() && !trajectory.samples.front().state.empty();
  out << "t,config_id,sup_norm,mean_infection";
  if (with_state) {
    for (std::size_t v = 0; v < trajectory.samples.front().state.size(); ++v) {
      out << ",i_" << (v + 1);
    }
  }
  out << '\n';
  for (const auto& s : trajectory.samples) {
    out << fmt(s.t) << ',' << s.config_id << ',' << fmt(s.sup_norm) << ',' << fmt(s.mean);
    if (with_state) {
      for (double v : s.state) out << ',' << fmt(v);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mtd
