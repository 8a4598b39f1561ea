#include "mtd/switching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mtd/errors.hpp"

namespace mtd {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate_constants(const GeneratorConstants& k, int state_count) {
  if (state_count < 2) {
    throw ValidationError("generator needs at least 2 states (got " +
                          std::to_string(state_count) + ")");
  }
  if (!(k.a > 0.0 && k.a < 1.0)) {
    throw ValidationError("generator constants: a must satisfy 0 < a < 1 (got " + fmt(k.a) +
                          ")");
  }
  if (!(k.b > 1.0)) {
    throw ValidationError("generator constants: b must satisfy b > 1 (got " + fmt(k.b) + ")");
  }
  if (!(k.c > k.b)) {
    throw ValidationError("generator constants: c must satisfy c > b (got c=" + fmt(k.c) +
                          ", b=" + fmt(k.b) + ")");
  }
  if (!(k.delta > 0.0)) {
    throw ValidationError("generator constants: delta must be > 0 (got " + fmt(k.delta) + ")");
  }
  const int n = state_count;
  const int j = k.violators;
  if (j < 1 || j > n - 1) {
    throw ValidationError("generator constants: violators must lie in [1, " +
                          std::to_string(n - 1) + "] (got " + std::to_string(j) + ")");
  }
  const double den_i = (j * k.c + (n - 1 - j)) / static_cast<double>(n - 1) - k.a;
  if (!(den_i > 0.0)) {
    throw ValidationError("generator constants: (i)-denominator <= 0 (" + fmt(den_i) +
                          "); satisfying-state rate bound is vacuous");
  }
  const double den_ii =
      k.b - k.c * (j - 1) / static_cast<double>(n - 1) - (n - j) / static_cast<double>(n - 1);
  if (!(den_ii > 0.0)) {
    throw ValidationError("generator constants: (ii)-denominator <= 0 (" + fmt(den_ii) +
                          "); violating-state rate bound is vacuous");
  }
}

GeneratorMatrix::GeneratorMatrix(std::vector<double> rates, int n) : rates_(std::move(rates)), n_(n) {
  if (n_ < 2) {
    throw ValidationError("generator matrix needs at least 2 states (got " +
                          std::to_string(n_) + ")");
  }
  if (rates_.size() != static_cast<std::size_t>(n_) * n_) {
    throw ValidationError("generator matrix: expected " + std::to_string(n_ * n_) +
                          " rates, got " + std::to_string(rates_.size()));
  }
  for (int r = 0; r < n_; ++r) {
    double row_sum = 0.0;
    double scale = 0.0;
    for (int p = 0; p < n_; ++p) {
      const double q = rates_[r * n_ + p];
      if (!std::isfinite(q)) {
        throw ValidationError("generator matrix: rate (" + std::to_string(r) + ", " +
                              std::to_string(p) + ") is not finite");
      }
      if (p == r) {
        if (!(q < 0.0)) {
          throw ValidationError("generator matrix: diagonal of state " + std::to_string(r) +
                                " must be strictly negative (got " + fmt(q) + ")");
        }
      } else if (q < 0.0) {
        throw ValidationError("generator matrix: off-diagonal rate (" + std::to_string(r) +
                              ", " + std::to_string(p) + ") is negative (" + fmt(q) + ")");
      }
      row_sum += q;
      scale = std::max(scale, std::abs(q));
    }
    if (std::abs(row_sum) > 1e-12 * std::max(1.0, scale)) {
      throw ValidationError("generator matrix: row " + std::to_string(r) +
                            " sums to " + fmt(row_sum) + ", expected 0 within 1e-12");
    }
  }
}

double GeneratorMatrix::rate(int from, int to) const {
  if (from < 0 || from >= n_ || to < 0 || to >= n_) {
    throw ValidationError("generator matrix: state index out of range");
  }
  return rates_[from * n_ + to];
}

double GeneratorMatrix::exit_rate(int state) const { return -rate(state, state); }

bool GeneratorMatrix::uniform_off_diagonal() const {
  for (int r = 0; r < n_; ++r) {
    const double expected = exit_rate(r) / (n_ - 1);
    for (int p = 0; p < n_; ++p) {
      if (p == r) continue;
      if (std::abs(rates_[r * n_ + p] - expected) > 1e-12 * std::max(1.0, expected)) {
        return false;
      }
    }
  }
  return true;
}

std::string GeneratorMatrix::to_csv() const {
  std::ostringstream out;
  for (int r = 0; r < n_; ++r) {
    for (int p = 0; p < n_; ++p) {
      if (p) out << ',';
      out << fmt(rates_[r * n_ + p]);
    }
    out << '\n';
  }
  return out.str();
}

GeneratorMatrix build_generator(std::span<const double> margins, const GeneratorConstants& k) {
  const int n = static_cast<int>(margins.size());
  validate_constants(k, n);
  const int j = k.violators;
  for (int r = 0; r < j; ++r) {
    if (!(margins[r] <= 0.0)) {
      throw ValidationError("build_generator: state " + std::to_string(r) +
                            " must be violating (margin <= 0), got " + fmt(margins[r]) +
                            "; order margins violators-first");
    }
  }
  for (int r = j; r < n; ++r) {
    if (!(margins[r] - k.delta > 0.0)) {
      throw ValidationError("build_generator: satisfying state " + std::to_string(r) +
                            " needs margin > delta (margin=" + fmt(margins[r]) +
                            ", delta=" + fmt(k.delta) + ")");
    }
  }

  const double den_i = (j * k.c + (n - 1 - j)) / static_cast<double>(n - 1) - k.a;
  const double den_ii =
      k.b - k.c * (j - 1) / static_cast<double>(n - 1) - (n - j) / static_cast<double>(n - 1);

  std::vector<double> rates(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    const double exit = r < j ? 2.0 * k.b * (-margins[r] + k.delta) / den_ii
                              : 2.0 * k.a * (margins[r] - k.delta) / den_i;
    rates[r * n + r] = -exit;
    const double hop = exit / (n - 1);
    for (int p = 0; p < n; ++p) {
      if (p != r) rates[r * n + p] = hop;
    }
  }
  return GeneratorMatrix(std::move(rates), n);
}

ScheduleMix stationary_distribution(const GeneratorMatrix& q, double delta) {
  const int n = q.size();

  // Solve Q^T pi^T = 0 with the last equation replaced by sum(pi) = 1.
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  std::vector<double> rhs(n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int p = 0; p < n; ++p) m[r * n + p] = q.rate(p, r);  // transpose
  }
  for (int p = 0; p < n; ++p) m[(n - 1) * n + p] = 1.0;
  rhs[n - 1] = 1.0;

  // Gaussian elimination with partial pivoting; n is small.
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(m[r * n + col]) > std::abs(m[pivot * n + col])) pivot = r;
    }
    if (std::abs(m[pivot * n + col]) < 1e-13) {
      throw NumericalError(
          "stationary distribution: generator is singular or reducible (no unique "
          "stationary law)");
    }
    if (pivot != col) {
      for (int p = 0; p < n; ++p) std::swap(m[pivot * n + p], m[col * n + p]);
      std::swap(rhs[pivot], rhs[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = m[r * n + col] / m[col * n + col];
      if (factor == 0.0) continue;
      for (int p = col; p < n; ++p) m[r * n + p] -= factor * m[col * n + p];
      rhs[r] -= factor * rhs[col];
    }
  }
  std::vector<double> pi(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = rhs[r];
    for (int p = r + 1; p < n; ++p) acc -= m[r * n + p] * pi[p];
    pi[r] = acc / m[r * n + r];
  }

  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0) {
      if (v < -1e-9) {
        throw NumericalError("stationary distribution: solver produced a negative occupancy " +
                             fmt(v));
      }
      v = 0.0;
    }
    sum += v;
  }
  for (double& v : pi) v /= sum;

  if (q.uniform_off_diagonal()) {
    // Uniform hops make the jump chain's stationary law uniform, so occupancy
    // is proportional to the mean sojourn 1/(-q_rr).  Cross-check.
    double x_sum = 0.0;
    std::vector<double> x(n);
    for (int r = 0; r < n; ++r) {
      x[r] = 1.0 / q.exit_rate(r);
      x_sum += x[r];
    }
    for (int r = 0; r < n; ++r) {
      if (std::abs(x[r] / x_sum - pi[r]) > 1e-10) {
        throw NumericalError(
            "stationary distribution: closed form 1/(-q_rr) disagrees with the linear solve "
            "at state " +
            std::to_string(r) + " (" + fmt(x[r] / x_sum) + " vs " + fmt(pi[r]) + ")");
      }
    }
  }

  return ScheduleMix(std::move(pi), delta);
}

Scheduler Scheduler::markov_generator(GeneratorMatrix q, std::uint64_t seed, int start_state) {
  if (start_state < 0 || start_state >= q.size()) {
    throw ValidationError("scheduler: start state " + std::to_string(start_state) +
                          " out of range for " + std::to_string(q.size()) + " states");
  }
  Scheduler s;
  s.mode_ = Mode::Markov;
  s.state_count_ = q.size();
  s.rng_.seed(seed);
  s.rates_.resize(static_cast<std::size_t>(q.size()) * q.size());
  for (int r = 0; r < q.size(); ++r)
    for (int p = 0; p < q.size(); ++p) s.rates_[r * q.size() + p] = q.rate(r, p);
  s.markov_state_ = start_state;
  return s;
}

Scheduler Scheduler::fixed_mix(std::vector<double> pi, double resolution, std::uint64_t seed,
                               int violator_state) {
  if (!(resolution > 0.0)) {
    throw ValidationError("scheduler: resolution must be > 0 (got " + fmt(resolution) + ")");
  }
  const int n = static_cast<int>(pi.size());
  if (violator_state < 0 || violator_state >= n) {
    throw ValidationError("scheduler: violator state " + std::to_string(violator_state) +
                          " out of range for " + std::to_string(n) + " states");
  }
  double sum = 0.0;
  for (int r = 0; r < n; ++r) {
    if (!(pi[r] >= 0.0) || !std::isfinite(pi[r])) {
      throw ValidationError("scheduler: occupancy fraction for state " + std::to_string(r) +
                            " must be non-negative (got " + fmt(pi[r]) + ")");
    }
    sum += pi[r];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("scheduler: occupancy fractions must sum to 1 (got " + fmt(sum) +
                          ")");
  }

  Scheduler s;
  s.mode_ = Mode::FixedMix;
  s.state_count_ = n;
  s.rng_.seed(seed);
  s.pi_ = std::move(pi);
  s.resolution_ = resolution;
  s.violator_state_ = violator_state;
  for (int r = 0; r < n; ++r) {
    if (s.pi_[r] > 0.0) {
      s.active_.push_back(r);
      if (r != violator_state) s.induced_.push_back(r);
    }
  }
  if (s.active_.empty()) {
    throw ValidationError("scheduler: every state has zero occupancy; nothing to schedule");
  }
  return s;
}

double Scheduler::draw_exponential(double mean) {
  // u in (0, 1]; inverse-CDF draw, bitwise reproducible across platforms.
  const double u = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  double t = -mean * std::log(u);
  if (!(t > 0.0)) t = mean * 1e-12;  // u == 1 draws collapse to a token sliver
  return t;
}

int Scheduler::pick_uniform(const std::vector<int>& pool) {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  std::size_t idx = static_cast<std::size_t>(u * pool.size());
  if (idx >= pool.size()) idx = pool.size() - 1;
  return pool[idx];
}

std::vector<SojournEntry> Scheduler::sample(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ValidationError("scheduler: horizon must be a positive real (got " + fmt(horizon) +
                          ")");
  }
  std::vector<SojournEntry> schedule;

  if (mode_ == Mode::Markov) {
    const int n = state_count_;
    int cur = markov_state_;
    double t = 0.0;
    while (t < horizon) {
      const double exit = -rates_[cur * n + cur];
      double dwell = draw_exponential(1.0 / exit);
      dwell = std::min(dwell, horizon - t);
      schedule.push_back({cur, t, dwell});
      t += dwell;
      if (t >= horizon) break;
      // successor ~ off-diagonal rates
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      double target = u * exit;
      int next = -1;
      for (int p = 0; p < n; ++p) {
        if (p == cur) continue;
        target -= rates_[cur * n + p];
        if (target < 0.0) {
          next = p;
          break;
        }
      }
      if (next < 0) {  // rounding fell off the end; take the last positive rate
        for (int p = n - 1; p >= 0; --p) {
          if (p != cur && rates_[cur * n + p] > 0.0) {
            next = p;
            break;
          }
        }
      }
      cur = next;
    }
    markov_state_ = cur;
    return schedule;
  }

  // fixed-mix mode
  if (active_.size() == 1) {
    schedule.push_back({active_[0], 0.0, horizon});
    return schedule;
  }
  int cur = pi_[violator_state_] > 0.0 ? violator_state_ : active_[0];
  double t = 0.0;
  std::vector<int> pool;
  while (t < horizon) {
    double dwell = draw_exponential(resolution_ * pi_[cur]);
    dwell = std::min(dwell, horizon - t);
    schedule.push_back({cur, t, dwell});
    t += dwell;
    if (t >= horizon) break;

    if (cur == violator_state_) {
      cur = pick_uniform(induced_);
    } else {
      pool.clear();
      for (int r : active_) {
        if (r != cur) pool.push_back(r);
      }
      cur = pick_uniform(pool);
    }
  }
  return schedule;
}

std::string schedule_to_csv(std::span<const SojournEntry> schedule) {
  std::ostringstream out;
  out << "state,start,duration\n";
  for (const auto& e : schedule) {
    out << e.state << ',' << fmt(e.start) << ',' << fmt(e.duration) << '\n';
  }
  return out.str();
}

}  // namespace mtd
