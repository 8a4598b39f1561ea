#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mtd/model.hpp"

namespace mtd {

enum class ShapeHint { None, Convex, Concave };

// Optimal parameter switching over a fixed structure: all configurations share
// one lambda_1, so each is fully described by its stability margin mu.
// Margins may arrive in any order; an internal permutation establishes the
// canonical ordering mu_1 <= 0 < mu_2 <= ... <= mu_N (violator first, then the
// satisfying margins ascending, ties broken by original position) and results
// are reported back in the caller's order.  Exactly one non-positive margin is
// required; several violators are the structure-switching generator's job.
struct ParamOptProblem {
  std::vector<double> margins;
  double delta = 0.0;                  // convergence-rate floor, >= 0
  std::optional<double> pi1;           // required occupancy of the violator
  std::optional<CostFunction> cost;
  ShapeHint shape = ShapeHint::None;
};

struct ParamOptResult {
  ScheduleMix mix;                     // fractions in the caller's input order
  std::optional<double> cost;          // total deployment cost of `mix`
  std::vector<int> active;             // 0-based input indices with pi > 0
  // k_star and pair use the canonical 1-based indexing (1 = violator), the
  // same convention the closed forms are stated in.
  std::optional<int> k_star;
  std::optional<std::pair<int, int>> pair;
};

// Largest feasible violator occupancy: pi_1* = (mu_N - delta)/(mu_N - mu_1),
// achieved by pairing the violator with the strongest configuration only
// (pi_N = (delta - mu_1)/(mu_N - mu_1), middle entries zero).  The returned
// mix saturates the rate constraint: sum pi_j mu_j = delta exactly.
// Throws InfeasibleError when mu_N < delta (no mix can meet the floor).
ParamOptResult max_pi1(const ParamOptProblem& p);

// Smallest canonical index k >= 2 whose margin exceeds the pivot threshold
// -pi1*mu_1/(1 - pi1).  Requires pi1 set and feasible.
int k_star(const ParamOptProblem& p);

// Cost of the two-configuration deployment that pins pi1 on the violator and
// splits the rest between canonical configurations l and m so the rate
// constraint is saturated:
//   F(mu_l, mu_m) = pi1 f(mu_1)
//                 + (f_m - f_l)/(mu_m - mu_l) * (delta - pi1 mu_1)
//                 + (mu_m f_l - mu_l f_m)/(mu_m - mu_l) * (1 - pi1).
// Requires cost and pi1; 2 <= l < m <= N with distinct margins.
double pair_cost_F(const ParamOptProblem& p, int l, int m);

// Minimum-cost mix with pi1 pinned on the violator.  When k_star == 2 all
// induced weight goes to configuration 2; otherwise the optimum is an
// exhaustive scan of F over l in [2, k_star-1], m in [k_star, N] (ties broken
// toward the lexicographically smallest pair), deployed as
//   pi_l = ((mu_m - delta) + pi1 (mu_1 - mu_m)) / (mu_m - mu_l)
//   pi_m = (-(mu_l - delta) + pi1 (mu_l - mu_1)) / (mu_m - mu_l).
// The reported cost is the mix's re-evaluated total and is cross-checked
// against F to 1e-10.
ParamOptResult min_cost(const ParamOptProblem& p);

// Shape-aware shortcut: convex costs are minimized by the pair
// (k_star - 1, k_star), concave costs by (2, N); k_star == 2 degenerates to
// the all-on-configuration-2 branch either way.  The declared shape is
// validated against the cost's second differences on the margin grid and a
// mismatch is a ValidationError.  Must agree with min_cost to 1e-10.
ParamOptResult min_cost_shaped(const ParamOptProblem& p);

// Brute-force check: scans the simplex {pi_2..pi_N >= 0, sum = 1 - pi1} at
// the given resolution, keeps points meeting the rate constraint exactly (a
// 1e-9 rounding allowance only), and returns the cheapest.  Holding the grid
// to the true constraint makes the comparison one-sided: the result can sit
// above the closed-form optimum by at most one grid step per free coordinate,
// never below it.  Requires N <= 6 and grid_step <= 1e-2.
ParamOptResult oracle_min_cost(const ParamOptProblem& p, double grid_step);

}  // namespace mtd
