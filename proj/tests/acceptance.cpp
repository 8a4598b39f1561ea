// Acceptance gate: ten end-to-end checks with pinned tolerances.  Each prints
// one [PASS]/[FAIL] line with its runtime; the process exits nonzero if any
// check fails.  Unlike the unit suite these run the full stack on the
// reference instances the library is expected to reproduce.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <json.hpp>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtd/dynamics.hpp"
#include "mtd/graph.hpp"
#include "mtd/model.hpp"
#include "mtd/opt_params.hpp"
#include "mtd/opt_structs.hpp"
#include "mtd/scenario.hpp"
#include "mtd/switching.hpp"
#include "oracles.hpp"

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Check {
  int failures = 0;
  std::ostringstream log;

  Check() { log << std::setprecision(17); }

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      log << "    FAIL: " << what << "\n";
    }
  }
  void expect_near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      ++failures;
      log << "    FAIL: " << what << " (got " << got << ", want " << want << " +/- " << tol
          << ")\n";
    }
  }
};

// The four-configuration reference instance: one violating and three induced
// postures on a shared structure with lambda_1 = 118.4.  Margins computed
// straight from the (beta, gamma) pairs.
mtd::ParamOptProblem reference_problem() {
  const double l1 = 118.4;
  mtd::ParamOptProblem p;
  p.margins = {0.2 - 0.00422 * l1, 0.4 - 0.000845 * l1, 0.6 - 0.00169 * l1,
               0.8 - 0.00169 * l1};
  p.delta = 1e-5;
  return p;
}

// The same instance with the margins rounded to display precision
// (-0.3, 0.3, 0.4, 0.6); the quoted 2/3 optimum is exact only on these.
mtd::ParamOptProblem rounded_problem() {
  mtd::ParamOptProblem p;
  p.margins = {-0.3, 0.3, 0.4, 0.6};
  p.delta = 1e-5;
  return p;
}

mtd::Configuration complete_config(int id, int n, double beta, double gamma) {
  auto g = std::make_shared<mtd::AttackDefenseStructure>(mtd::generate_complete(n));
  return mtd::Configuration::with_structure(id, beta, gamma, std::move(g));
}

// --- criterion 1: closed-form max violator occupancy -------------------------

void c1_max_pi1(Check& c) {
  auto p = rounded_problem();
  (void)mtd::max_pi1(p);  // warm call, excluded from the timing
  const auto t0 = Clock::now();
  const auto r = mtd::max_pi1(p);
  const double elapsed = ms_since(t0);

  c.expect_near(r.mix.fractions[0], 2.0 / 3.0, 1e-4, "pi1* on display-rounded margins");
  c.expect(r.active == std::vector<int>{0, 3},
           "only the violator and the strongest margin are active");
  c.expect(elapsed < 1.0, "closed form answers in under a millisecond");

  // Margins taken straight from (beta, gamma) land within rounding noise.
  const auto exact = mtd::max_pi1(reference_problem());
  c.expect_near(exact.mix.fractions[0], 2.0 / 3.0, 3e-4, "pi1* on raw beta/gamma margins");
}

// --- criterion 2: concave minimum-cost reproduction --------------------------

void c2_concave(Check& c) {
  auto p = reference_problem();
  p.pi1 = 0.6;
  p.cost = mtd::CostFunction::sqrt_shifted(10.0, 0.5);
  (void)mtd::min_cost(p);
  const auto t0 = Clock::now();
  const auto r = mtd::min_cost(p);
  const double elapsed = ms_since(t0);

  c.expect(r.cost.has_value(), "cost is reported");
  c.expect_near(*r.cost, 6.5696, 0.01, "minimum deployment cost");
  c.expect(r.pair == std::make_pair(2, 4), "active pair is (2, 4)");
  c.expect_near(r.mix.fractions[1], 0.2, 0.005, "pi_2");
  c.expect(r.mix.fractions[2] == 0.0, "pi_3 is exactly zero");
  c.expect_near(r.mix.fractions[3], 0.2, 0.005, "pi_4");
  c.expect(elapsed < 1.0, "scan answers in under a millisecond");
}

// --- criterion 3: convex minimum-cost reproduction ---------------------------

void c3_convex(Check& c) {
  auto p = reference_problem();
  p.pi1 = 0.6;
  p.cost = mtd::CostFunction::quadratic_shifted(100.0, 0.1);
  const auto r = mtd::min_cost(p);

  c.expect(r.cost.has_value(), "cost is reported");
  // The widened band is deliberate: direct evaluation of the pair-cost formula
  // on this instance gives ~14.77, while 14.6 circulates as a display-rounded
  // reference value.
  c.expect(*r.cost >= 14.5 && *r.cost <= 14.9, "cost lies in [14.5, 14.9]");
  c.expect(r.pair == std::make_pair(3, 4), "active pair is (3, 4)");
  c.expect(r.mix.fractions[1] == 0.0, "pi_2 is exactly zero");
  c.expect_near(r.mix.fractions[2], 0.3, 0.005, "pi_3");
  c.expect_near(r.mix.fractions[3], 0.1, 0.005, "pi_4");
}

// --- criterion 4: shape-aware shortcut equals the full scan -------------------

void c4_shaped(Check& c) {
  {
    auto p = reference_problem();
    p.pi1 = 0.6;
    p.cost = mtd::CostFunction::quadratic_shifted(100.0, 0.1);
    p.shape = mtd::ShapeHint::Convex;
    const auto fast = mtd::min_cost_shaped(p);
    const auto full = mtd::min_cost(p);
    c.expect(std::abs(*fast.cost - *full.cost) < 1e-10, "convex reference instance");
  }
  {
    auto p = reference_problem();
    p.pi1 = 0.6;
    p.cost = mtd::CostFunction::sqrt_shifted(10.0, 0.5);
    p.shape = mtd::ShapeHint::Concave;
    const auto fast = mtd::min_cost_shaped(p);
    const auto full = mtd::min_cost(p);
    c.expect(std::abs(*fast.cost - *full.cost) < 1e-10, "concave reference instance");
  }

  std::mt19937 rng(20250819);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int done = 0;
  double worst = 0.0;
  while (done < 100) {
    const int n = 3 + static_cast<int>(rng() % 3);  // 3..5 margins
    std::vector<double> mu(n);
    mu[0] = -0.05 - 0.6 * uni(rng);
    for (int j = 1; j < n; ++j) mu[j] = 0.05 + 0.9 * uni(rng);
    std::sort(mu.begin() + 1, mu.end());
    const double pi1 = 0.05 + 0.6 * uni(rng);
    const double delta = 1e-4 * uni(rng);

    // Feasibility with slack; keep every satisfying margin clear of the
    // delta band so both branches are defined.
    const double T = -pi1 * mu[0] / (1.0 - pi1);
    const double need = T + delta / (1.0 - pi1);
    if (mu[n - 1] < need + 1e-3) continue;
    bool in_band = false;
    for (int j = 1; j < n; ++j) {
      if (mu[j] > T - 2e-3 && mu[j] < need + 2e-3) in_band = true;
    }
    if (in_band) continue;

    mtd::ParamOptProblem p;
    p.margins = mu;
    p.delta = delta;
    p.pi1 = pi1;
    const bool convex = (done % 2 == 0);
    p.cost = convex
                 ? mtd::CostFunction::quadratic_shifted(5.0 + 20.0 * uni(rng), uni(rng))
                 : mtd::CostFunction::sqrt_shifted(5.0 + 20.0 * uni(rng), 1.0 + uni(rng));
    p.shape = convex ? mtd::ShapeHint::Convex : mtd::ShapeHint::Concave;

    const auto fast = mtd::min_cost_shaped(p);
    const auto full = mtd::min_cost(p);
    worst = std::max(worst, std::abs(*fast.cost - *full.cost));
    ++done;
  }
  c.expect(worst < 1e-10, "100 random instances (worst diff " + std::to_string(worst) + ")");
}

// --- criterion 5: grid oracle brackets the closed form ------------------------

void c5_param_oracle(Check& c) {
  const auto t0 = Clock::now();
  std::mt19937 rng(424244);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double grid_step = 1e-3;
  int done = 0;
  while (done < 100) {
    const int n = 3 + static_cast<int>(rng() % 3);  // N in {3, 4, 5}
    std::vector<double> mu(n);
    mu[0] = -0.05 - 0.5 * uni(rng);
    for (int j = 1; j < n; ++j) mu[j] = 0.05 + 0.9 * uni(rng);
    std::sort(mu.begin() + 1, mu.end());
    const double pi1 = 0.05 + 0.5 * uni(rng);
    const double delta = 1e-4 * uni(rng);
    const double T = -pi1 * mu[0] / (1.0 - pi1);
    if (mu[n - 1] < T + delta / (1.0 - pi1) + 1e-3) continue;

    mtd::ParamOptProblem p;
    p.margins = mu;
    p.delta = delta;
    p.pi1 = pi1;
    p.cost = mtd::CostFunction::quadratic_shifted(10.0, 0.5);

    const auto exact = mtd::min_cost(p);
    const auto gridded = mtd::oracle_min_cost(p, grid_step);

    double fmax = 0.0, fmin = std::numeric_limits<double>::infinity();
    for (double m : mu) {
      const double cost_m = (*p.cost)(m);
      fmax = std::max(fmax, cost_m);
      fmin = std::min(fmin, cost_m);
    }
    const double band = (n - 2) * grid_step * (fmax - fmin) + 1e-9;
    const double diff = *gridded.cost - *exact.cost;
    if (diff < -1e-9 * std::max(1.0, std::abs(*exact.cost)) || diff > band) {
      c.expect(false, "instance " + std::to_string(done) + ": oracle diff " +
                          std::to_string(diff) + " outside [0, " + std::to_string(band) + "]");
      return;
    }
    ++done;
  }
  const double seconds = ms_since(t0) / 1e3;
  c.expect(seconds < 60.0,
           "100 instances under 60 s (took " + std::to_string(seconds) + " s)");
}

// --- criterion 6: two-state structure switching closed form -------------------

void c6_struct_closed_form(Check& c) {
  const mtd::GeneratorConstants k{0.8, 1.5, 2.4, 1e-5, 1};
  std::mt19937 rng(565656);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double mu1 = -(0.01 + 0.98 * uni(rng));
    const double muN = k.delta + 0.01 + (1.0 - k.delta - 0.01) * uni(rng);
    const double closed = (muN - k.delta) / (muN - 6.0 * mu1 + 5.0 * k.delta);

    mtd::StructOptProblem p;
    p.margins = {mu1, muN};
    p.constants = k;
    const auto r = mtd::max_pi1_struct(p);
    if (std::abs(r.mix.fractions[0] - closed) > 1e-10) {
      c.expect_near(r.mix.fractions[0], closed, 1e-10,
                    "closed form at mu1=" + std::to_string(mu1) +
                        ", muN=" + std::to_string(muN));
      return;
    }

    const auto q = mtd::build_generator(p.margins, k);
    const auto st = mtd::stationary_distribution(q, k.delta);
    if (std::abs(st.fractions[0] - closed) > 1e-10) {
      c.expect_near(st.fractions[0], closed, 1e-10,
                    "generator stationarity at mu1=" + std::to_string(mu1) +
                        ", muN=" + std::to_string(muN));
      return;
    }
  }
}

// --- criterion 7: structure-switching worked instance -------------------------

void c7_struct_worked(Check& c) {
  mtd::StructOptProblem p;
  p.margins = {-0.3, 0.1, 0.3};
  p.constants = mtd::GeneratorConstants{0.8, 1.5, 2.4, 1e-5, 1};
  p.pi1 = 1.0 / 15.0;
  p.cost = mtd::CostFunction::quadratic_shifted(100.0, 0.1);

  const auto subsets = mtd::feasible_subsets(p);
  const std::vector<std::vector<int>> expected = {{3}, {2, 3}};
  c.expect(subsets == expected, "feasible subsets are {3} and {2, 3}");

  const auto r = mtd::min_cost_struct(p);
  c.expect(r.subset == std::vector<int>{2, 3}, "optimal subset is {2, 3}");
  c.expect_near(*r.cost, 6.70, 0.01, "total cost Psi");
  c.expect_near(r.mix.fractions[1], 0.7083, 1e-3, "pi_2");
  c.expect_near(r.mix.fractions[2], 0.2250, 1e-3, "pi_3");

  const auto gridded = mtd::oracle_min_cost_struct(p, 1e-3);
  const double diff = *gridded.cost - *r.cost;
  c.expect(diff >= -1e-9 && diff <= 0.05,
           "grid oracle within 0.05 above the closed form (diff " + std::to_string(diff) +
               ")");
}

// --- criterion 8: integrator properties ---------------------------------------

void c8_dynamics(Check& c) {
  // The all-zero state is an exact fixed point: integrate and compare bitwise.
  {
    const auto cfg = complete_config(1, 20, 0.5, 0.01);
    mtd::InfectionState clean{std::vector<double>(20, 0.0), 0.0};
    mtd::IntegrationOptions opts;
    opts.record_state = true;
    const auto traj = mtd::integrate_static(cfg, clean, 0.05, 10.0, opts);
    bool exact = true;
    for (const auto& s : traj.samples) {
      if (s.sup_norm != 0.0) exact = false;
      for (double v : s.state) {
        if (v != 0.0) exact = false;
      }
    }
    c.expect(exact, "clean state is preserved bitwise");
  }

  // Fourth-order convergence: halving dt shrinks the error by >= 12x.
  {
    const auto cfg = complete_config(1, 20, 0.3, 0.03);
    mtd::InfectionState init{std::vector<double>(20, 0.3), 0.0};
    mtd::IntegrationOptions opts;
    opts.record_state = true;
    auto final_state = [&](double dt) {
      const auto traj = mtd::integrate_static(cfg, init, dt, 2.0, opts);
      return traj.samples.back().state;
    };
    const auto ref = final_state(0.00625);
    auto err = [&](double dt) {
      const auto got = final_state(dt);
      double e = 0.0;
      for (std::size_t i = 0; i < got.size(); ++i) e = std::max(e, std::abs(got[i] - ref[i]));
      return e;
    };
    const double e_coarse = err(0.1);
    const double e_fine = err(0.05);
    c.expect(e_fine > 0.0 && e_coarse / e_fine >= 12.0,
             "dt-halving error ratio >= 12 (got " + std::to_string(e_coarse / e_fine) + ")");
  }

  // Complete-graph equilibria in both regimes match the scalar oracle to 1e-3.
  {
    const auto cfg = complete_config(1, 20, 0.5, 0.01);  // margin +0.31: dies out
    mtd::InfectionState init{std::vector<double>(20, 0.3), 0.0};
    const auto traj = mtd::integrate_static(cfg, init, 0.05, 100.0);
    const double target = test_oracle::complete_graph_equilibrium(20, 0.5, 0.01);
    c.expect(target == 0.0, "scalar oracle reports extinction above the threshold");
    c.expect_near(traj.samples.back().sup_norm, target, 1e-3, "decayed equilibrium");
  }
  {
    const auto cfg = complete_config(1, 20, 0.2, 0.02);  // margin -0.18: endemic
    mtd::InfectionState init{std::vector<double>(20, 0.3), 0.0};
    const auto traj = mtd::integrate_static(cfg, init, 0.05, 400.0);
    const double target = test_oracle::complete_graph_equilibrium(20, 0.2, 0.02);
    c.expect(target > 0.0, "scalar oracle reports an endemic level below the threshold");
    c.expect_near(traj.samples.back().sup_norm, target, 1e-3, "endemic equilibrium");
  }
}

// --- criterion 9: end-to-end optimized schedule --------------------------------

void c9_end_to_end(Check& c) {
  const auto t0 = Clock::now();
  const auto s = mtd::load_scenario(std::string(MTD_SCENARIO_DIR) + "/k20_switching.json");
  const auto opt = mtd::cmd_optimize(s);
  const auto sim = mtd::cmd_simulate(s, opt.schedule_json);
  c.expect(sim.converged, "optimized schedule converges to the clean state");

  const auto summary = json::parse(sim.summary_json);
  c.expect(summary["final_sup_norm"].get<double>() < 1e-4,
           "final sup-norm below 1e-4 at the horizon");
  c.expect(summary["max_occupancy_error"].get<double>() <= 0.02,
           "measured occupancy within 0.02 of the target");

  // Holding the violating posture for the whole horizon must fail the same check.
  json control = {{"version", 1},
                  {"scheduler", "fixed_mix"},
                  {"config_ids", {1, 2, 3}},
                  {"pi", {1.0, 0.0, 0.0}},
                  {"resolution", 0.5},
                  {"seed", 7},
                  {"violator_state", 0}};
  const auto held = mtd::cmd_simulate(s, control.dump());
  c.expect(!held.converged, "pure violating-posture run fails the convergence check");

  const double seconds = ms_since(t0) / 1e3;
  c.expect(seconds < 30.0, "end-to-end under 30 s (took " + std::to_string(seconds) + " s)");
}

// --- criterion 10: occupancy grid monotone in the strongest margin -------------

void c10_monotone_sweep(Check& c) {
  const auto s = mtd::parse_scenario(R"({
    "version": 1, "mode": "params", "delta": 1e-5,
    "configurations": [
      {"id": 1, "beta": 0.1, "gamma": 0.004, "lambda1": 100.0},
      {"id": 2, "beta": 0.7, "gamma": 0.004, "lambda1": 100.0}
    ]})",
                                     ".");
  const std::string csv = mtd::sweep_pi1_params(s, 0.1, 1.0, 0.05);

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  c.expect(line == "mu1_abs,mu_n,pi1_star", "header row");

  std::map<long, std::vector<std::pair<double, double>>> rows;  // keyed by mu1 in 1e-6 ticks
  int count = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string a, b, v;
    std::getline(cells, a, ',');
    std::getline(cells, b, ',');
    std::getline(cells, v, ',');
    rows[std::lround(std::stod(a) * 1e6)].emplace_back(std::stod(b), std::stod(v));
    ++count;
  }
  c.expect(count == 19 * 19, "19x19 grid over [0.1, 1]^2 at step 0.05");

  bool monotone = true;
  for (auto& [key, pts] : rows) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (pts[i].second < pts[i - 1].second - 1e-12) monotone = false;
    }
  }
  c.expect(monotone, "pi1* non-decreasing in mu_N for every fixed mu_1");
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Check&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {"closed-form max violator occupancy (2/3 on the reference instance)", c1_max_pi1},
      {"concave minimum-cost reproduction (6.5696 +/- 0.01, pair {2,4})", c2_concave},
      {"convex minimum-cost reproduction (pair {3,4}, cost in [14.5, 14.9])", c3_convex},
      {"shape-aware shortcut equals the full scan (diff < 1e-10)", c4_shaped},
      {"parameter grid oracle brackets the closed form (100 random instances)",
       c5_param_oracle},
      {"structure-switching closed form and generator stationarity (1e-10)",
       c6_struct_closed_form},
      {"structure-switching worked instance with oracle cross-check", c7_struct_worked},
      {"integrator: exact clean state, 4th-order steps, equilibria vs oracle", c8_dynamics},
      {"end-to-end schedule drives the epidemic out; holding the violator fails",
       c9_end_to_end},
      {"occupancy grid monotone non-decreasing in the strongest margin", c10_monotone_sweep},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    const auto t0 = Clock::now();
    try {
      criteria[i].fn(check);
    } catch (const std::exception& e) {
      ++check.failures;
      check.log << "    FAIL: unexpected exception: " << e.what() << "\n";
    }
    const double elapsed = ms_since(t0);
    std::printf("[%s] %2zu. %s (%.1f ms)\n", check.failures == 0 ? "PASS" : "FAIL", i + 1,
                criteria[i].name, elapsed);
    if (check.failures != 0) {
      std::fputs(check.log.str().c_str(), stdout);
      ++failed;
    }
  }

  if (failed == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
    return 0;
  }
  std::printf("%d of %zu acceptance criteria FAILED\n", failed, criteria.size());
  return 1;
}
