#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tiltbound/model.hpp"

namespace tiltbound {

/// xoshiro256** (Blackman & Vigna), seeded through splitmix64. The algorithm
/// is fixed so that trajectories are reproducible across platforms and across
/// reimplementations in other languages:
///
///   seeding:  state[i] = splitmix64(seed) for i = 0..3 (successive outputs)
///   uniform:  (next() >> 11) * 2^-53, a double in [0, 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  double uniform();

  /// Generator for trial `index` of a run with master seed `seed`: seeded with
  /// splitmix64 applied to seed + index * 0x9E3779B97F4A7C15.
  static Rng for_trial(std::uint64_t seed, std::uint64_t index);

 private:
  std::array<std::uint64_t, 4> s_{};
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Inverse-CDF draw from a probability row in stored order.
std::size_t sample_categorical(std::span<const double> probabilities, Rng& rng);

/// X_0 ~ q, X_{k+1} ~ P(X_k, ·); returns n + 1 state indices.
std::vector<std::size_t> sample_trajectory(const MarkovModel& model, std::size_t n, Rng& rng);

/// Exact two-sided Clopper-Pearson interval for `hits` successes in `trials`.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence = 0.95);

/// Monte Carlo estimate of P_q((1/n) Σ_{k=1}^n f(X_k) ≥ μ) (upper) or ≤ μ
/// (lower). Ties count as hits.
struct TailEstimate {
  std::int64_t n = 0;
  double mu = 0.0;
  Side side = Side::upper;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t seed = 0;
};

TailEstimate empirical_tail(const MarkovModel& model, std::int64_t n, double mu, Side side,
                            std::uint64_t trials, std::uint64_t seed);

/// Λ_n(θ) = (1/n) log E_q[exp(θ Σ_{k=1}^n f(X_k))], computed exactly as
/// (1/n) log(qᵀ P̃_θⁿ 1) with per-step sup-norm rescaling.
double lambda_n_exact(const MarkovModel& model, double theta, std::int64_t n);

struct ErgodicCheck {
  double theta = 0.0;
  std::int64_t n = 0;
  double Lambda_n = 0.0;
  double Lambda = 0.0;
  double gap = 0.0;    ///< |Λ_n − Λ|
  double bound = 0.0;  ///< log K / n
  bool pass = false;   ///< gap ≤ bound + 1e-9
};

/// Needs A1-A4 (computes both tails' constants).
ErgodicCheck ergodic_check(const MarkovModel& model, double theta, std::int64_t n);
/// Same with a precomputed K = max(K_u, K_l).
ErgodicCheck ergodic_check(const MarkovModel& model, double theta, std::int64_t n, double K);

}  // namespace tiltbound
