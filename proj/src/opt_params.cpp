#include "mtd/opt_params.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "canonical_margins.hpp"
#include "mtd/errors.hpp"

namespace mtd {

namespace {

using detail::CanonicalMargins;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using Canonical = CanonicalMargins;

Canonical canonicalize(const ParamOptProblem& p) {
  Canonical c = detail::canonical_margins(p.margins, "parameter optimization");
  if (!(p.delta >= 0.0) || !std::isfinite(p.delta)) {
    throw ValidationError("parameter optimization: delta must be a non-negative real (got " +
                          fmt(p.delta) + ")");
  }
  return c;
}

double pi1_bound(const Canonical& c, double delta) {
  return (c.mu.back() - delta) / (c.mu.back() - c.mu.front());
}

double require_pi1(const ParamOptProblem& p, const Canonical& c) {
  if (!p.pi1.has_value()) {
    throw ValidationError("parameter optimization: this operation needs the required violator "
                          "occupancy pi1");
  }
  const double pi1 = *p.pi1;
  if (!(pi1 > 0.0) || !std::isfinite(pi1)) {
    throw ValidationError("parameter optimization: pi1 must be a positive real (got " +
                          fmt(pi1) + ")");
  }
  if (c.mu.back() < p.delta) {
    throw InfeasibleError("parameter optimization: largest margin " + fmt(c.mu.back()) +
                          " is below the rate floor delta=" + fmt(p.delta) +
                          "; no mix can meet the constraint");
  }
  const double bound = pi1_bound(c, p.delta);
  if (pi1 > bound + 1e-12) {
    throw InfeasibleError("infeasible occupancy: pi1=" + fmt(pi1) +
                          " exceeds the achievable maximum " + fmt(bound));
  }
  return std::min(pi1, bound);
}

const CostFunction& require_cost(const ParamOptProblem& p) {
  if (!p.cost.has_value()) {
    throw ValidationError("parameter optimization: this operation needs a cost function");
  }
  return *p.cost;
}

// Pivot threshold separating margins too weak to pair with the violator alone.
double pivot_threshold(double mu1, double pi1) {
  if (mu1 == 0.0) return 0.0;
  return -pi1 * mu1 / (1.0 - pi1);
}

int k_star_impl(const Canonical& c, double pi1) {
  const double t = pivot_threshold(c.mu.front(), pi1);
  for (int k = 1; k < c.n; ++k) {
    if (c.mu[k] > t) return k + 1;  // canonical 1-based
  }
  throw InfeasibleError("parameter optimization: no margin exceeds the pivot threshold " +
                        fmt(t) + "; pi1 sits exactly on its bound with delta=0, leaving no "
                        "configuration to absorb the remaining time");
}

double total_cost(const CostFunction& f, const std::vector<double>& pi_canon,
                  const std::vector<double>& mu) {
  double total = 0.0;
  for (std::size_t i = 0; i < pi_canon.size(); ++i) {
    if (pi_canon[i] > 0.0) total += pi_canon[i] * f(mu[i]);
  }
  return total;
}

// Assembles a result from canonical-order fractions, mapping back to the
// caller's order and clamping sub-1e-12 negatives from the closed forms.
ParamOptResult make_result(const ParamOptProblem& p, const Canonical& c,
                           std::vector<double> pi_canon, std::optional<double> cost,
                           std::optional<int> k, std::optional<std::pair<int, int>> pair) {
  std::vector<double> fractions(c.n, 0.0);
  std::vector<int> active;
  for (int i = 0; i < c.n; ++i) {
    double v = pi_canon[i];
    if (v < 0.0) {
      if (v < -1e-9) {
        throw NumericalError("parameter optimization: deployment entry " + fmt(v) +
                             " is negative; the rate floor delta is too close to the pivot "
                             "threshold for a two-configuration deployment");
      }
      v = 0.0;
    }
    fractions[c.order[i]] = v;
    if (v > 0.0) active.push_back(c.order[i]);
  }
  std::sort(active.begin(), active.end());
  ParamOptResult r{ScheduleMix(std::move(fractions), p.delta), cost, std::move(active), k,
                   pair};
  return r;
}

}  // namespace

ParamOptResult max_pi1(const ParamOptProblem& p) {
  const Canonical c = canonicalize(p);
  const double mu1 = c.mu.front();
  const double muN = c.mu.back();
  if (muN < p.delta) {
    throw InfeasibleError("parameter optimization: largest margin " + fmt(muN) +
                          " is below the rate floor delta=" + fmt(p.delta) +
                          "; no mix can meet the constraint");
  }
  const double span = muN - mu1;
  std::vector<double> pi(c.n, 0.0);
  pi.front() = (muN - p.delta) / span;
  pi.back() = (p.delta - mu1) / span;
  return make_result(p, c, std::move(pi), std::nullopt, std::nullopt, std::nullopt);
}

int k_star(const ParamOptProblem& p) {
  const Canonical c = canonicalize(p);
  const double pi1 = require_pi1(p, c);
  return k_star_impl(c, pi1);
}

double pair_cost_F(const ParamOptProblem& p, int l, int m) {
  const Canonical c = canonicalize(p);
  const double pi1 = require_pi1(p, c);
  const CostFunction& f = require_cost(p);
  if (!(2 <= l && l < m && m <= c.n)) {
    throw ValidationError("pair cost: need 2 <= l < m <= " + std::to_string(c.n) + " (got l=" +
                          std::to_string(l) + ", m=" + std::to_string(m) + ")");
  }
  const double mu1 = c.mu.front();
  const double mul = c.mu[l - 1];
  const double mum = c.mu[m - 1];
  if (!(mum - mul > 0.0)) {
    throw ValidationError("pair cost: margins of l and m coincide (" + fmt(mul) +
                          "); the pair carries no extra freedom");
  }
  const double fl = f(mul);
  const double fm = f(mum);
  return pi1 * f(mu1) + (fm - fl) / (mum - mul) * (p.delta - pi1 * mu1) +
         (mum * fl - mul * fm) / (mum - mul) * (1.0 - pi1);
}

namespace {

// Saturating two-configuration deployment for canonical indices (l, m).
void deploy_pair(const Canonical& c, double pi1, double delta, int l, int m,
                 std::vector<double>& pi) {
  const double mu1 = c.mu.front();
  const double mul = c.mu[l - 1];
  const double mum = c.mu[m - 1];
  pi.assign(c.n, 0.0);
  pi.front() = pi1;
  pi[l - 1] = ((mum - delta) + pi1 * (mu1 - mum)) / (mum - mul);
  pi[m - 1] += (-(mul - delta) + pi1 * (mul - mu1)) / (mum - mul);
}

ParamOptResult min_cost_common(const ParamOptProblem& p, bool shaped) {
  const Canonical c = canonicalize(p);
  const double pi1 = require_pi1(p, c);
  const CostFunction& f = require_cost(p);
  const int k = k_star_impl(c, pi1);

  if (shaped) {
    if (p.shape == ShapeHint::None) {
      throw ValidationError("shaped minimization: the problem carries no shape hint; use the "
                            "exhaustive search instead");
    }
    const bool ok = p.shape == ShapeHint::Convex ? f.convex_on(c.mu) : f.concave_on(c.mu);
    if (!ok) {
      throw ValidationError(std::string("shape mismatch: the cost function is not ") +
                            (p.shape == ShapeHint::Convex ? "convex" : "concave") +
                            " on the margin grid; drop or fix the shape hint");
    }
  }

  std::vector<double> pi;
  if (k == 2) {
    pi.assign(c.n, 0.0);
    pi.front() = pi1;
    pi[1] = 1.0 - pi1;
    const double cost = total_cost(f, pi, c.mu);
    return make_result(p, c, std::move(pi), cost, k, std::nullopt);
  }

  int best_l = -1, best_m = -1;
  double best_f = std::numeric_limits<double>::infinity();
  if (shaped && p.shape == ShapeHint::Convex) {
    best_l = k - 1;
    best_m = k;
    best_f = pair_cost_F(p, best_l, best_m);
  } else if (shaped && p.shape == ShapeHint::Concave) {
    best_l = 2;
    best_m = c.n;
    best_f = pair_cost_F(p, best_l, best_m);
  } else {
    for (int l = 2; l <= k - 1; ++l) {
      for (int m = k; m <= c.n; ++m) {
        std::vector<double> trial;
        deploy_pair(c, pi1, p.delta, l, m, trial);
        // Deployments driven negative by a rate floor sitting inside the
        // pivot band are not reachable mixes; skip them.  The pair (l, N)
        // is always clean, so the scan never comes up empty.
        if (trial[l - 1] < -1e-12 || trial[m - 1] < -1e-12) continue;
        const double value = pair_cost_F(p, l, m);
        if (value < best_f) {
          best_f = value;
          best_l = l;
          best_m = m;
        }
      }
    }
    if (best_l < 0) {
      throw NumericalError("parameter optimization: every candidate pair was rejected; this "
                           "should be impossible while pi1 is feasible");
    }
  }

  deploy_pair(c, pi1, p.delta, best_l, best_m, pi);
  for (double& v : pi) {
    if (v < 0.0 && v >= -1e-12) v = 0.0;
  }
  const double reevaluated = total_cost(f, pi, c.mu);
  if (std::abs(reevaluated - best_f) > 1e-10 * std::max(1.0, std::abs(best_f))) {
    throw NumericalError("parameter optimization: deployment cost " + fmt(reevaluated) +
                         " disagrees with the pair formula " + fmt(best_f));
  }
  return make_result(p, c, std::move(pi), reevaluated, k, std::make_pair(best_l, best_m));
}

}  // namespace

ParamOptResult min_cost(const ParamOptProblem& p) { return min_cost_common(p, false); }

ParamOptResult min_cost_shaped(const ParamOptProblem& p) { return min_cost_common(p, true); }

ParamOptResult oracle_min_cost(const ParamOptProblem& p, double grid_step) {
  const Canonical c = canonicalize(p);
  const double pi1 = require_pi1(p, c);
  const CostFunction& f = require_cost(p);
  if (c.n > 6) {
    throw ValidationError("oracle: the grid scan supports at most 6 configurations (got " +
                          std::to_string(c.n) + ")");
  }
  if (!(grid_step > 0.0) || grid_step > 1e-2 + 1e-15) {
    throw ValidationError("oracle: grid_step must lie in (0, 1e-2] (got " + fmt(grid_step) +
                          ")");
  }

  const int n = c.n;
  const double rest = 1.0 - pi1;
  const int m_steps = std::max(1, static_cast<int>(std::lround(rest / grid_step)));
  const double h = rest / m_steps;
  const double rhs = p.delta - pi1 * c.mu.front();
  // Rounding allowance only: the grid is held to the exact rate constraint so
  // the scan can never undercut the true optimum, making the comparison with
  // the closed form one-sided (oracle >= closed form up to this epsilon).
  const double slack = 1e-9 * std::max(1.0, std::abs(rhs));

  // Pre-evaluated costs and margins of the satisfying configurations.
  std::vector<double> fv(n), mu(n);
  for (int i = 0; i < n; ++i) {
    mu[i] = c.mu[i];
    fv[i] = f(mu[i]);
  }
  const double base_cost = pi1 * fv[0];

  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<int> best_k;
  std::vector<int> ticks(n, 0);  // ticks[i] * h = weight on canonical i (i >= 1)

  if (n == 2) {
    const double s = rest * mu[1];
    if (s < rhs - slack) {
      throw InfeasibleError("oracle: the single grid point violates the rate constraint");
    }
    best_cost = base_cost + rest * fv[1];
    best_k = {0, m_steps};
  } else {
    // Free coordinates are canonical 1..n-3 plus the innermost pair
    // (n-2, n-1): the loop walks weight from the strongest margin to the
    // second-strongest one tick at a time, updating the constraint and cost
    // incrementally.
    const double dmu = mu[n - 2] - mu[n - 1];
    const double dfv = fv[n - 2] - fv[n - 1];
    // Recursion over the outer coordinates.
    auto scan = [&](auto&& self, int level, int remaining, double s0, double c0) -> void {
      if (level == n - 2) {
        double s = s0 + remaining * h * mu[n - 1];
        double cost = c0 + remaining * h * fv[n - 1];
        for (int t = 0; t <= remaining; ++t) {
          if (s >= rhs - slack && cost < best_cost) {
            best_cost = cost;
            ticks[n - 2] = t;
            ticks[n - 1] = remaining - t;
            best_k = ticks;
          }
          s += h * dmu;
          cost += h * dfv;
        }
        return;
      }
      for (int t = 0; t <= remaining; ++t) {
        ticks[level] = t;
        self(self, level + 1, remaining - t, s0 + t * h * mu[level], c0 + t * h * fv[level]);
      }
      ticks[level] = 0;
    };
    scan(scan, 1, m_steps, 0.0, base_cost);
    if (best_k.empty()) {
      throw InfeasibleError("oracle: no grid point satisfies the rate constraint at step " +
                            fmt(grid_step));
    }
  }

  std::vector<double> pi(n, 0.0);
  pi[0] = pi1;
  for (int i = 1; i < n; ++i) pi[i] = best_k[i] * h;
  // Absorb rounding so the mix sums to exactly 1.
  double sum = pi1;
  for (int i = 1; i < n; ++i) sum += pi[i];
  pi[n - 1] += 1.0 - sum;
  return make_result(p, c, std::move(pi), best_cost, std::nullopt, std::nullopt);
}

}  // namespace mtd
