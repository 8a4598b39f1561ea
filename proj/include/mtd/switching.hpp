#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtd/model.hpp"

namespace mtd {

// Constants shaping the random-switching generator.  They bound the quadratic
// Lyapunov certificates per state: satisfying states use certificates in
// (a*I, I) and violating states in (b*I, c*I), which requires 0 < a < 1 < b < c.
// `violators` is the number of leading (non-positive-margin) states j, and
// `delta` the convergence-rate floor.
struct GeneratorConstants {
  double a = 0.8;
  double b = 1.5;
  double c = 2.4;
  double delta = 1e-5;
  int violators = 1;
};

// Checks 0 < a < 1 < b < c, delta > 0, 1 <= violators <= state_count - 1, and
// that both rate-bound denominators are positive:
//   (i)  (j*c + N-1-j)/(N-1) - a   (satisfying rows)
//   (ii) b - c*(j-1)/(N-1) - (N-j)/(N-1)   (violating rows)
// Throws ValidationError naming the violated inequality.
void validate_constants(const GeneratorConstants& k, int state_count);

// Conservative transition-rate matrix Q of the switching chain: off-diagonal
// rates are non-negative, rows sum to zero, and every diagonal is strictly
// negative (no absorbing state).
class GeneratorMatrix {
 public:
  // row-major rates, size n*n, n >= 2; validates the properties above.
  GeneratorMatrix(std::vector<double> rates, int n);

  int size() const noexcept { return n_; }
  double rate(int from, int to) const;
  double exit_rate(int state) const;  // -q_rr > 0

  // True when every row's off-diagonal entries are mutually equal (the
  // uniform-jump construction used by build_generator).
  bool uniform_off_diagonal() const;

  // CSV dump: one row per state, 17-significant-digit rates.
  std::string to_csv() const;

 private:
  std::vector<double> rates_;
  int n_ = 0;
};

// Builds the generator whose stationary occupancy certificate the constants
// encode: margins come ordered violators-first (the first `violators` entries
// must be <= 0, the rest must exceed delta), diagonals sit exactly on the rate
// bounds
//   satisfying k:  -q_kk = 2a(mu_k - delta) / [(j*c + N-1-j)/(N-1) - a]
//   violating l:   -q_ll = 2b(-mu_l + delta) / [b - c(j-1)/(N-1) - (N-j)/(N-1)]
// and each row spreads -q_rr uniformly over the other N-1 states.
GeneratorMatrix build_generator(std::span<const double> margins, const GeneratorConstants& k);

// Stationary distribution pi of Q (pi Q = 0, sum pi = 1) via a dense linear
// solve.  For uniform-off-diagonal generators the closed form
// x_r = 1/(-q_rr), pi_r = x_r / sum_p x_p must agree with the solve within
// 1e-10 (checked; disagreement raises NumericalError).  `delta` is carried
// into the returned mix unchanged.
ScheduleMix stationary_distribution(const GeneratorMatrix& q, double delta = 1e-5);

// One realized sojourn: the scheduler holds `state` during
// [start, start + duration).
struct SojournEntry {
  int state = 0;  // index into the scheduler's state set (caller maps to config ids)
  double start = 0.0;
  double duration = 0.0;
};

// Switching-sequence sampler.  Two modes:
//
//   markov_generator: jump-chain simulation of a GeneratorMatrix; sojourn in
//   state r is exponential with rate -q_rr, the successor is drawn
//   proportionally to the off-diagonal rates q_rp.
//
//   fixed_mix: realizes a target occupancy vector pi directly.  Sojourns in
//   state r are exponential with mean resolution * pi_r.  States alternate
//   with no self-transitions: from the violator state the next state is
//   uniform over the active induced states; from an induced state it is
//   uniform over the other active states including the violator.  Every
//   uniform-over-others jump chain has a uniform stationary law, so the
//   long-run occupancy of state r is exactly pi_r.  States with pi_r = 0
//   never appear; a single active state covers the horizon in one sojourn.
//
// Sampling is deterministic for a fixed seed.  A Scheduler instance is not
// shareable while sampling (it owns its RNG) but may be moved between threads
// between calls; repeated sample() calls continue the random stream.
class Scheduler {
 public:
  static Scheduler markov_generator(GeneratorMatrix q, std::uint64_t seed, int start_state = 0);
  static Scheduler fixed_mix(std::vector<double> pi, double resolution, std::uint64_t seed,
                             int violator_state = 0);

  int state_count() const noexcept { return state_count_; }

  // Samples sojourns covering [0, horizon); the last entry is truncated at the
  // horizon.  horizon must be positive.
  std::vector<SojournEntry> sample(double horizon);

 private:
  Scheduler() = default;

  double draw_exponential(double mean);
  int pick_uniform(const std::vector<int>& pool);

  enum class Mode { Markov, FixedMix } mode_ = Mode::Markov;
  int state_count_ = 0;
  std::mt19937_64 rng_;

  // markov mode
  std::vector<double> rates_;
  int markov_state_ = 0;

  // fixed-mix mode
  std::vector<double> pi_;
  double resolution_ = 1.0;
  int violator_state_ = 0;
  std::vector<int> active_;
  std::vector<int> induced_;
};

// CSV dump of a sampled schedule: state,start,duration per row.
std::string schedule_to_csv(std::span<const SojournEntry> schedule);

}  // namespace mtd
