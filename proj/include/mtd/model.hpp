#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mtd/graph.hpp"

namespace mtd {

// One deployable system configuration: infection parameters (beta = curing
// rate, gamma = per-contact infection probability) plus the source of its
// dominant eigenvalue lambda_1 -- either an explicit attack-defense structure
// or a bare numeric value for analyses that never touch node-level dynamics.
struct Configuration {
  int id = 0;
  double beta = 0.0;
  double gamma = 0.0;
  std::variant<std::shared_ptr<const AttackDefenseStructure>, double> lambda1_source;

  static Configuration with_structure(int id, double beta, double gamma,
                                      std::shared_ptr<const AttackDefenseStructure> structure);
  static Configuration with_lambda1(int id, double beta, double gamma, double lambda1);

  bool has_structure() const;
  const AttackDefenseStructure* structure_or_null() const;

  // Resolves lambda_1 (computing & caching the spectral radius for
  // structure-backed configurations).
  double lambda1() const;

  // Stability margin mu = beta - gamma * lambda_1.  Positive margin means the
  // clean state is exponentially stable under this configuration alone.
  double margin() const;
};

enum class ThresholdVerdict { Converges, MayNotConverge };

// Single-configuration threshold: mu > 0 -> Converges.  The boundary mu = 0 is
// conservatively reported as MayNotConverge.
ThresholdVerdict check_static_threshold(const Configuration& config);

// Occupancy mix over a configuration set, paired with the convergence-rate
// floor delta used by the optimizers.  Fractions must be in [0, 1] and sum to
// 1 within 1e-12; delta must be non-negative.
struct ScheduleMix {
  std::vector<double> fractions;
  double delta = 0.0;

  ScheduleMix(std::vector<double> fractions, double delta);
};

// Switched/averaged threshold for configurations sharing one lambda_1
// (parameter switching over a fixed structure): the time-averaged dynamics
// converge iff sum_j pi_j mu_j > 0, equivalently
// sum_j pi_j beta_j / sum_j pi_j gamma_j > lambda_1.  Heterogeneous lambda_1
// values are rejected; the boundary sum = 0 is MayNotConverge.
ThresholdVerdict check_averaged_threshold(std::span<const Configuration> configs,
                                          const ScheduleMix& mix);

// Deployment cost as a function of the stability margin.  All kinds are
// validated to be non-decreasing for positive margins at construction time:
//   affine:            slope * mu + intercept            (slope >= 0)
//   quadratic_shifted: scale * (mu + shift)^2            (scale > 0, shift >= 0)
//   sqrt_shifted:      scale * sqrt(mu + shift)          (scale > 0; domain mu + shift >= 0)
//   table:             sorted (mu, cost) breakpoints with linear interpolation
//                      between them; evaluation outside the table range is a
//                      domain error
class CostFunction {
 public:
  enum class Kind { Affine, QuadraticShifted, SqrtShifted, Table };

  static CostFunction affine(double slope, double intercept);
  static CostFunction quadratic_shifted(double scale, double shift);
  static CostFunction sqrt_shifted(double scale, double shift);
  static CostFunction table(std::vector<std::pair<double, double>> points);

  Kind kind() const noexcept { return kind_; }
  // The two scalar parameters of the analytic kinds (slope/intercept,
  // scale/shift); unused for tables.
  double param0() const noexcept { return p0_; }
  double param1() const noexcept { return p1_; }
  const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }

  // Evaluates the cost; throws ValidationError on domain violations
  // (sqrt of a negative argument, margin outside the table range) and when the
  // result would be negative.
  double operator()(double mu) const;

  // Discrete shape of the restriction to the given margin grid, decided by
  // second differences of chord slopes (with a small relative tolerance).
  // The grid must be sorted ascending.
  bool convex_on(std::span<const double> margins) const;
  bool concave_on(std::span<const double> margins) const;

 private:
  CostFunction(Kind kind, double p0, double p1) : kind_(kind), p0_(p0), p1_(p1) {}

  Kind kind_;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

double eval_cost(const CostFunction& f, double mu);

}  // namespace mtd
