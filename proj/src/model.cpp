#include "mtd/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mtd/errors.hpp"

namespace mtd {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_rates(int id, double beta, double gamma) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw ValidationError("configuration id=" + std::to_string(id) +
                          ": beta must lie in (0, 1] (got " + fmt(beta) + ")");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ValidationError("configuration id=" + std::to_string(id) +
                          ": gamma must lie in (0, 1] (got " + fmt(gamma) + ")");
  }
}

}  // namespace

Configuration Configuration::with_structure(
    int id, double beta, double gamma,
    std::shared_ptr<const AttackDefenseStructure> structure) {
  validate_rates(id, beta, gamma);
  if (!structure) {
    throw ValidationError("configuration id=" + std::to_string(id) +
                          ": null structure");
  }
  Configuration c;
  c.id = id;
  c.beta = beta;
  c.gamma = gamma;
  c.lambda1_source = std::move(structure);
  return c;
}

Configuration Configuration::with_lambda1(int id, double beta, double gamma, double lambda1) {
  validate_rates(id, beta, gamma);
  if (!(lambda1 >= 0.0) || !std::isfinite(lambda1)) {
    throw ValidationError("configuration id=" + std::to_string(id) +
                          ": lambda1 must be a finite non-negative real (got " +
                          fmt(lambda1) + ")");
  }
  Configuration c;
  c.id = id;
  c.beta = beta;
  c.gamma = gamma;
  c.lambda1_source = lambda1;
  return c;
}

bool Configuration::has_structure() const {
  return std::holds_alternative<std::shared_ptr<const AttackDefenseStructure>>(lambda1_source);
}

const AttackDefenseStructure* Configuration::structure_or_null() const {
  if (const auto* p =
          std::get_if<std::shared_ptr<const AttackDefenseStructure>>(&lambda1_source)) {
    return p->get();
  }
  return nullptr;
}

double Configuration::lambda1() const {
  if (const auto* bare = std::get_if<double>(&lambda1_source)) {
    return *bare;
  }
  const auto& structure =
      std::get<std::shared_ptr<const AttackDefenseStructure>>(lambda1_source);
  if (!structure) {
    throw ValidationError("configuration id=" + std::to_string(id) +
                          ": lambda1 unresolvable (null structure)");
  }
  return structure->spectral_radius();
}

double Configuration::margin() const { return beta - gamma * lambda1(); }

ThresholdVerdict check_static_threshold(const Configuration& config) {
  return config.margin() > 0.0 ? ThresholdVerdict::Converges
                               : ThresholdVerdict::MayNotConverge;
}

ScheduleMix::ScheduleMix(std::vector<double> fractions_in, double delta_in)
    : fractions(std::move(fractions_in)), delta(delta_in) {
  if (fractions.empty()) {
    throw ValidationError("schedule mix must cover at least one configuration");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw ValidationError("schedule mix: delta must be a finite non-negative real (got " +
                          fmt(delta) + ")");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < fractions.size(); ++j) {
    const double f = fractions[j];
    if (!(f >= 0.0 && f <= 1.0) || !std::isfinite(f)) {
      throw ValidationError("schedule mix: fraction " + std::to_string(j) +
                            " must lie in [0, 1] (got " + fmt(f) + ")");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("schedule mix: fractions must sum to 1 within 1e-12 (got " +
                          fmt(sum) + ")");
  }
}

ThresholdVerdict check_averaged_threshold(std::span<const Configuration> configs,
                                          const ScheduleMix& mix) {
  if (configs.size() != mix.fractions.size()) {
    throw ValidationError("averaged threshold: mix covers " +
                          std::to_string(mix.fractions.size()) + " configurations but " +
                          std::to_string(configs.size()) + " were given");
  }
  if (configs.empty()) {
    throw ValidationError("averaged threshold: no configurations");
  }
  double lambda_min = configs[0].lambda1();
  double lambda_max = lambda_min;
  for (const auto& c : configs) {
    const double l = c.lambda1();
    lambda_min = std::min(lambda_min, l);
    lambda_max = std::max(lambda_max, l);
  }
  if (lambda_max - lambda_min > 1e-9 * std::max(1.0, lambda_max)) {
    throw ValidationError(
        "averaged threshold applies only to parameter switching over a shared structure; "
        "lambda1 values range from " +
        fmt(lambda_min) + " to " + fmt(lambda_max));
  }
  double avg = 0.0;
  for (std::size_t j = 0; j < configs.size(); ++j) {
    avg += mix.fractions[j] * configs[j].margin();
  }
  return avg > 0.0 ? ThresholdVerdict::Converges : ThresholdVerdict::MayNotConverge;
}

CostFunction CostFunction::affine(double slope, double intercept) {
  if (!(slope >= 0.0) || !std::isfinite(slope)) {
    throw ValidationError("affine cost: slope must be >= 0 so the cost is non-decreasing "
                          "for positive margins (got " +
                          fmt(slope) + ")");
  }
  if (!std::isfinite(intercept)) {
    throw ValidationError("affine cost: intercept must be finite");
  }
  return CostFunction(Kind::Affine, slope, intercept);
}

CostFunction CostFunction::quadratic_shifted(double scale, double shift) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("quadratic_shifted cost: scale must be > 0 (got " + fmt(scale) + ")");
  }
  if (!(shift >= 0.0) || !std::isfinite(shift)) {
    throw ValidationError("quadratic_shifted cost: shift must be >= 0 so the cost is "
                          "non-decreasing for positive margins (got " +
                          fmt(shift) + ")");
  }
  return CostFunction(Kind::QuadraticShifted, scale, shift);
}

CostFunction CostFunction::sqrt_shifted(double scale, double shift) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ValidationError("sqrt_shifted cost: scale must be > 0 (got " + fmt(scale) + ")");
  }
  if (!std::isfinite(shift)) {
    throw ValidationError("sqrt_shifted cost: shift must be finite");
  }
  return CostFunction(Kind::SqrtShifted, scale, shift);
}

CostFunction CostFunction::table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) {
    throw ValidationError("table cost: need at least two breakpoints for interpolation (got " +
                          std::to_string(points.size()) + ")");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
      throw ValidationError("table cost: breakpoint " + std::to_string(i) + " is not finite");
    }
    if (points[i].second < 0.0) {
      throw ValidationError("table cost: breakpoint " + std::to_string(i) +
                            " has negative cost " + fmt(points[i].second));
    }
    if (i > 0 && !(points[i].first > points[i - 1].first)) {
      throw ValidationError("table cost: margins must be strictly increasing (breakpoint " +
                            std::to_string(i) + ")");
    }
    // Non-decreasing wherever both breakpoints sit at positive margin.
    if (i > 0 && points[i - 1].first > 0.0 && points[i].second < points[i - 1].second) {
      throw ValidationError("table cost: cost decreases between positive margins " +
                            fmt(points[i - 1].first) + " and " + fmt(points[i].first));
    }
  }
  CostFunction f(Kind::Table, 0.0, 0.0);
  f.points_ = std::move(points);
  return f;
}

double CostFunction::operator()(double mu) const {
  if (!std::isfinite(mu)) {
    throw ValidationError("cost function: margin must be finite");
  }
  double value = 0.0;
  switch (kind_) {
    case Kind::Affine:
      value = p0_ * mu + p1_;
      break;
    case Kind::QuadraticShifted: {
      const double z = mu + p1_;
      value = p0_ * z * z;
      break;
    }
    case Kind::SqrtShifted: {
      const double z = mu + p1_;
      if (z < 0.0) {
        throw ValidationError("sqrt_shifted cost undefined at margin " + fmt(mu) +
                              " (argument " + fmt(z) + " < 0)");
      }
      value = p0_ * std::sqrt(z);
      break;
    }
    case Kind::Table: {
      if (mu < points_.front().first || mu > points_.back().first) {
        throw ValidationError("table cost: margin " + fmt(mu) + " outside table range [" +
                              fmt(points_.front().first) + ", " + fmt(points_.back().first) +
                              "]");
      }
      // First breakpoint at or above mu; exists because mu <= back().first.
      auto hi = std::lower_bound(points_.begin(), points_.end(), mu,
                                 [](const auto& p, double m) { return p.first < m; });
      if (hi == points_.begin() || hi->first == mu) {
        value = hi->second;
      } else {
        const auto lo = hi - 1;
        const double t = (mu - lo->first) / (hi->first - lo->first);
        value = lo->second + t * (hi->second - lo->second);
      }
      break;
    }
  }
  if (value < 0.0) {
    throw ValidationError("cost function evaluates negative at margin " + fmt(mu) + " (" +
                          fmt(value) + "); deployment costs must be non-negative");
  }
  return value;
}

namespace {

// Chord slopes of f over consecutive grid points; the sign pattern of their
// differences decides discrete convexity/concavity.
std::vector<double> chord_slopes(const CostFunction& f, std::span<const double> margins) {
  if (margins.size() < 2) return {};
  std::vector<double> slopes;
  slopes.reserve(margins.size() - 1);
  for (std::size_t i = 0; i + 1 < margins.size(); ++i) {
    if (!(margins[i + 1] > margins[i])) {
      throw ValidationError("shape check: margin grid must be strictly increasing");
    }
    slopes.push_back((f(margins[i + 1]) - f(margins[i])) / (margins[i + 1] - margins[i]));
  }
  return slopes;
}

double slope_scale(const std::vector<double>& slopes) {
  double scale = 1.0;
  for (double s : slopes) scale = std::max(scale, std::abs(s));
  return scale;
}

}  // namespace

bool CostFunction::convex_on(std::span<const double> margins) const {
  const auto slopes = chord_slopes(*this, margins);
  const double tol = 1e-9 * slope_scale(slopes);
  for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
    if (slopes[i + 1] < slopes[i] - tol) return false;
  }
  return true;
}

bool CostFunction::concave_on(std::span<const double> margins) const {
  const auto slopes = chord_slopes(*this, margins);
  const double tol = 1e-9 * slope_scale(slopes);
  for (std::size_t i = 0; i + 1 < slopes.size(); ++i) {
    if (slopes[i + 1] > slopes[i] + tol) return false;
  }
  return true;
}

double eval_cost(const CostFunction& f, double mu) { return f(mu); }

}  // namespace mtd
