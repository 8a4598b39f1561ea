#include "mtd/opt_structs.hpp"

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

struct Ctx {
  CanonicalMargins c;
  double delta = 0.0;
};

Ctx validate(const StructOptProblem& p) {
  Ctx ctx;
  ctx.c = detail::canonical_margins(p.margins, "structure optimization");
  if (p.constants.violators != 1) {
    throw ValidationError("structure optimization: the closed forms assume a single violating "
                          "configuration (constants.violators == 1, got " +
                          std::to_string(p.constants.violators) + ")");
  }
  validate_constants(p.constants, 2);
  ctx.delta = p.constants.delta;
  for (int i = 1; i < ctx.c.n; ++i) {
    if (!(ctx.c.mu[i] > ctx.delta)) {
      throw ValidationError("structure optimization: satisfying margin " + fmt(ctx.c.mu[i]) +
                            " does not exceed the rate floor delta=" + fmt(ctx.delta) +
                            "; that configuration's required sojourn bound is infinite");
    }
  }
  return ctx;
}

double xbar1_of(const StructOptProblem& p, const Ctx& ctx) {
  const auto& k = p.constants;
  return (k.b - 1.0) / (2.0 * k.b * (-ctx.c.mu.front() + ctx.delta));
}

// Minimum mean sojourn of an induced configuration when m_prime of them share
// the chain with the violator.
double xbar_of(const StructOptProblem& p, const Ctx& ctx, double mu_k, int m_prime) {
  const auto& k = p.constants;
  return ((k.c + m_prime - 1.0) / m_prime - k.a) / (2.0 * k.a * (mu_k - ctx.delta));
}

double require_pi1(const StructOptProblem& p, bool strictly_positive) {
  if (!p.pi1.has_value()) {
    throw ValidationError("structure optimization: this operation needs the required violator "
                          "occupancy pi1");
  }
  const double pi1 = *p.pi1;
  if (!std::isfinite(pi1) || pi1 < 0.0 || (strictly_positive && pi1 == 0.0) || pi1 >= 1.0) {
    throw ValidationError(std::string("structure optimization: pi1 must lie in ") +
                          (strictly_positive ? "(0, 1)" : "[0, 1)") + " (got " + fmt(pi1) +
                          ")");
  }
  return pi1;
}

// Maps canonical-order fractions back to the caller's order.
ScheduleMix to_caller_mix(const Ctx& ctx, const std::vector<double>& pi_canon) {
  std::vector<double> fractions(ctx.c.n, 0.0);
  for (int i = 0; i < ctx.c.n; ++i) fractions[ctx.c.order[i]] = pi_canon[i];
  return ScheduleMix(std::move(fractions), ctx.delta);
}

std::vector<std::vector<int>> enumerate_feasible(const StructOptProblem& p, const Ctx& ctx,
                                                 double pi1, double xbar1,
                                                 double* best_single_bound_out) {
  const int n = ctx.c.n;
  if (n > 24) {
    throw ValidationError("structure optimization: subset enumeration supports at most 24 "
                          "configurations (got " + std::to_string(n) + ")");
  }
  std::vector<std::vector<int>> feasible;
  std::vector<int> members;
  for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
    members.clear();
    for (int i = 1; i < n; ++i) {
      if (mask & (1u << (i - 1))) members.push_back(i + 1);  // canonical 1-based
    }
    const int m_prime = static_cast<int>(members.size());
    double sum = 0.0;
    for (int k : members) sum += xbar_of(p, ctx, ctx.c.mu[k - 1], m_prime);
    if (pi1 <= xbar1 / (xbar1 + sum) + 1e-12) feasible.push_back(members);
  }
  std::sort(feasible.begin(), feasible.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  if (best_single_bound_out) {
    const double y = xbar_of(p, ctx, ctx.c.mu.back(), 1);
    *best_single_bound_out = xbar1 / (xbar1 + y);
  }
  return feasible;
}

}  // namespace

SojournBounds xbar_bounds(const StructOptProblem& p, const std::vector<int>& subset) {
  const Ctx ctx = validate(p);
  if (subset.empty()) {
    throw ValidationError("sojourn bounds: the induced subset must be non-empty");
  }
  SojournBounds b;
  b.xbar1 = xbar1_of(p, ctx);
  const int m_prime = static_cast<int>(subset.size());
  b.xbar.reserve(subset.size());
  for (int k : subset) {
    if (k < 2 || k > ctx.c.n) {
      throw ValidationError("sojourn bounds: subset index " + std::to_string(k) +
                            " is outside the canonical range 2.." + std::to_string(ctx.c.n));
    }
    b.xbar.push_back(xbar_of(p, ctx, ctx.c.mu[k - 1], m_prime));
  }
  return b;
}

StructOptResult max_pi1_struct(const StructOptProblem& p) {
  const Ctx ctx = validate(p);
  const int n = ctx.c.n;
  const double x = xbar1_of(p, ctx);
  const double y = xbar_of(p, ctx, ctx.c.mu.back(), 1);
  const double pi1 = x / (x + y);
  std::vector<double> pi_canon(n, 0.0);
  pi_canon.front() = pi1;
  pi_canon.back() = 1.0 - pi1;
  StructOptResult r{to_caller_mix(ctx, pi_canon), std::nullopt, {n}, {x, y}, 0.0};
  return r;
}

std::vector<std::vector<int>> feasible_subsets(const StructOptProblem& p) {
  const Ctx ctx = validate(p);
  const double pi1 = require_pi1(p, false);
  const double xbar1 = xbar1_of(p, ctx);
  double t5_bound = 0.0;
  auto feasible = enumerate_feasible(p, ctx, pi1, xbar1, &t5_bound);
  if (feasible.empty()) {
    throw InfeasibleError("infeasible occupancy: pi1=" + fmt(pi1) +
                          " exceeds the structure-switching maximum " + fmt(t5_bound));
  }
  return feasible;
}

StructOptResult min_cost_struct(const StructOptProblem& p) {
  const Ctx ctx = validate(p);
  const double pi1 = require_pi1(p, true);
  if (!p.cost.has_value()) {
    throw ValidationError("structure optimization: this operation needs a cost function");
  }
  const CostFunction& g = *p.cost;
  const auto subsets = feasible_subsets(p);
  const double xbar1 = xbar1_of(p, ctx);
  const double cap = (1.0 - pi1) / pi1 * xbar1;

  double best_psi = std::numeric_limits<double>::infinity();
  const std::vector<int>* best_subset = nullptr;
  const double g1 = g(ctx.c.mu.front());

  for (const auto& s : subsets) {
    const int m_prime = static_cast<int>(s.size());
    double sum_xbar = 0.0;
    double sum_xg = 0.0;
    for (int k : s) {
      const double xb = xbar_of(p, ctx, ctx.c.mu[k - 1], m_prime);
      sum_xbar += xb;
      sum_xg += xb * g(ctx.c.mu[k - 1]);
    }
    double slack = cap - sum_xbar;
    if (slack < 0.0) slack = 0.0;  // feasibility was granted within tolerance
    const double g_recipient = g(ctx.c.mu[s.front() - 1]);
    const double avg = (sum_xg + g_recipient * slack) / (sum_xbar + slack);
    const double psi = pi1 * g1 + (1.0 - pi1) * avg;
    if (psi < best_psi) {
      best_psi = psi;
      best_subset = &s;
    }
  }

  const auto& s = *best_subset;
  const int m_prime = static_cast<int>(s.size());
  std::vector<double> x(s.size());
  double sum_x = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    x[i] = xbar_of(p, ctx, ctx.c.mu[s[i] - 1], m_prime);
    sum_x += x[i];
  }
  double slack = cap - sum_x;
  if (slack < 0.0) slack = 0.0;
  x.front() += slack;
  sum_x += slack;

  const double total = xbar1 + sum_x;
  std::vector<double> pi_canon(ctx.c.n, 0.0);
  pi_canon.front() = xbar1 / total;
  double reevaluated = pi_canon.front() * g1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    pi_canon[s[i] - 1] = x[i] / total;
    reevaluated += pi_canon[s[i] - 1] * g(ctx.c.mu[s[i] - 1]);
  }
  if (std::abs(reevaluated - best_psi) > 1e-10 * std::max(1.0, std::abs(best_psi))) {
    throw NumericalError("structure optimization: deployment cost " + fmt(reevaluated) +
                         " disagrees with the subset formula " + fmt(best_psi));
  }

  std::vector<double> sojourn;
  sojourn.reserve(s.size() + 1);
  sojourn.push_back(xbar1);
  sojourn.insert(sojourn.end(), x.begin(), x.end());
  StructOptResult r{to_caller_mix(ctx, pi_canon), reevaluated, s, std::move(sojourn),
                    slack};
  return r;
}

StructOptResult oracle_min_cost_struct(const StructOptProblem& p, double grid_step) {
  const Ctx ctx = validate(p);
  const double pi1 = require_pi1(p, true);
  if (!p.cost.has_value()) {
    throw ValidationError("structure optimization: this operation needs a cost function");
  }
  if (ctx.c.n > 5) {
    throw ValidationError("oracle: the sojourn grid scan supports at most 5 configurations "
                          "(got " + std::to_string(ctx.c.n) + ")");
  }
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) {
    throw ValidationError("oracle: grid_step must be a positive real (got " + fmt(grid_step) +
                          ")");
  }
  const CostFunction& g = *p.cost;
  const auto subsets = feasible_subsets(p);
  const double xbar1 = xbar1_of(p, ctx);
  const double cap = (1.0 - pi1) / pi1 * xbar1;
  const double g1 = g(ctx.c.mu.front());

  double best_cost = std::numeric_limits<double>::infinity();
  const std::vector<int>* best_subset = nullptr;
  std::vector<double> best_x;

  std::vector<double> xb, gv, x;
  for (const auto& s : subsets) {
    const int m_prime = static_cast<int>(s.size());
    xb.resize(s.size());
    gv.resize(s.size());
    x.resize(s.size());
    double sum_xbar = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      xb[i] = xbar_of(p, ctx, ctx.c.mu[s[i] - 1], m_prime);
      gv[i] = g(ctx.c.mu[s[i] - 1]);
      sum_xbar += xb[i];
    }
    double budget = cap - sum_xbar;
    if (budget < 0.0) budget = 0.0;

    // Offsets above the per-state floors: full grid steps plus the exact
    // remaining budget, so box corners are hit without rounding.
    auto scan = [&](auto&& self, std::size_t level, double remaining) -> void {
      if (level == s.size()) {
        double sum_x = 0.0, sum_xg = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          sum_x += x[i];
          sum_xg += x[i] * gv[i];
        }
        const double cost = pi1 * g1 + (1.0 - pi1) * sum_xg / sum_x;
        if (cost < best_cost) {
          best_cost = cost;
          best_subset = &s;
          best_x = x;
        }
        return;
      }
      const double tiny = 1e-12 * std::max(1.0, cap);
      for (double offset = 0.0; offset < remaining - tiny; offset += grid_step) {
        x[level] = xb[level] + offset;
        self(self, level + 1, remaining - offset);
      }
      x[level] = xb[level] + remaining;
      self(self, level + 1, 0.0);
    };
    scan(scan, 0, budget);
  }

  const auto& s = *best_subset;
  double sum_x = 0.0;
  for (double v : best_x) sum_x += v;
  const double x1 = pi1 / (1.0 - pi1) * sum_x;
  std::vector<double> pi_canon(ctx.c.n, 0.0);
  pi_canon.front() = pi1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    pi_canon[s[i] - 1] = (1.0 - pi1) * best_x[i] / sum_x;
  }

  double slack = cap;
  {
    const int m_prime = static_cast<int>(s.size());
    for (int k : s) slack -= xbar_of(p, ctx, ctx.c.mu[k - 1], m_prime);
    if (slack < 0.0) slack = 0.0;
  }

  std::vector<double> sojourn;
  sojourn.reserve(s.size() + 1);
  sojourn.push_back(x1);
  sojourn.insert(sojourn.end(), best_x.begin(), best_x.end());
  StructOptResult r{to_caller_mix(ctx, pi_canon), best_cost, s, std::move(sojourn), slack};
  return r;
}

}  // namespace mtd
