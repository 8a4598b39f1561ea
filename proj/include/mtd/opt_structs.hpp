#pragma once

#include <optional>
#include <vector>

#include "mtd/model.hpp"
#include "mtd/switching.hpp"

namespace mtd {

// Optimal structure switching with fixed infection parameters: every
// configuration shares (beta, gamma) and differs only in its attack-defense
// structure, hence in its margin mu = beta - gamma * lambda_1.  Guarantees
// come from the conservative random-switching generator, so the generator
// constants (a, b, c, delta) are part of the problem; a single violating
// configuration is assumed (constants.violators == 1).
//
// Margins follow the same canonical convention as the parameter case:
// violator first, satisfying margins ascending, results mapped back to the
// caller's order.  Every satisfying margin must exceed the rate floor delta
// (otherwise its required sojourn bound is infinite and the state is
// unusable).
struct StructOptProblem {
  std::vector<double> margins;
  GeneratorConstants constants;
  std::optional<double> pi1;         // required occupancy of the violator
  std::optional<CostFunction> cost;
};

struct StructOptResult {
  ScheduleMix mix;                   // fractions in the caller's input order
  std::optional<double> cost;        // total deployment cost Psi
  // Induced configurations in canonical 1-based indexing (2..N), ascending.
  std::vector<int> subset;
  // Mean sojourn times of the switching chain, chain-indexed: sojourn[0] is
  // the violator, sojourn[i] belongs to subset[i-1].  Occupancies are the
  // normalized sojourns: mix reproduces sojourn[r] / sum(sojourn) exactly.
  std::vector<double> sojourn;
  double slack = 0.0;                // Delta: sojourn headroom beyond the bounds
};

// Per-state sojourn bounds of the switching chain for a given induced subset
// (size m'): the violator may stay at most
//   xbar_1 = (b - 1) / (2 b (-mu_1 + delta))
// and each induced configuration k must stay at least
//   xbar_k(m') = ((c + m' - 1)/m' - a) / (2 a (mu_k - delta)).
// `subset` uses canonical 1-based indices in {2..N}.
struct SojournBounds {
  double xbar1 = 0.0;
  std::vector<double> xbar;          // aligned with the subset argument
};
SojournBounds xbar_bounds(const StructOptProblem& p, const std::vector<int>& subset);

// Largest feasible violator occupancy under structure switching:
// pi_1* = X / (X + Y) with X = xbar_1 and Y = xbar_N(1); the optimal chain
// alternates between the violator and the strongest configuration only.
StructOptResult max_pi1_struct(const StructOptProblem& p);

// All induced subsets S of {2..N} whose sojourn bounds can accommodate the
// pinned pi1, i.e. pi1 <= xbar_1 / (xbar_1 + sum_{k in S} xbar_k(|S|));
// ordered by size then lexicographically.  Empty result is an
// InfeasibleError (pi1 exceeds even the best single-configuration bound).
std::vector<std::vector<int>> feasible_subsets(const StructOptProblem& p);

// Minimum-cost structure schedule with pi1 pinned: for each feasible subset
// the sojourn slack
//   Delta(S) = ((1 - pi1)/pi1) xbar_1 - sum_k xbar_k(|S|)
// is assigned to the member with the smallest margin (the cheapest one,
// costs being non-decreasing in the margin), giving the induced average
//   G(S) = (sum_k xbar_k g(mu_k) + g(mu_min(S)) Delta) / (sum_k xbar_k + Delta)
// and total cost Psi = pi1 g(mu_1) + (1 - pi1) G(S).  Returns the argmin
// subset (ties broken toward smaller, then lexicographically earlier sets)
// with the occupancy mix given by normalized sojourns.
StructOptResult min_cost_struct(const StructOptProblem& p);

// Brute-force check: for each feasible subset, scans sojourn vectors on a
// grid over the box {x_k >= xbar_k(|S|), sum x_k <= ((1-pi1)/pi1) xbar_1}
// (box corners are on the grid exactly) and evaluates the occupancy-weighted
// cost.  Requires N <= 5.
StructOptResult oracle_min_cost_struct(const StructOptProblem& p, double grid_step);

}  // namespace mtd
