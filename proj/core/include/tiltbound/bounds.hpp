#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tiltbound/family.hpp"
#include "tiltbound/model.hpp"

namespace tiltbound {

/// Where the grid search for each supremum ended up.
struct GridSummary {
  double theta_max = 0.0;        ///< right end of the evaluated grid
  std::size_t rounds = 0;        ///< refinement rounds performed
  std::size_t points = 0;        ///< distinct θ values evaluated
  bool converged = false;        ///< false: budget exhausted, values are best-so-far
  bool K_at_limit = false;       ///< K attained by the θ → ∞ limit vector
  double K_argmax = 0.0;         ///< θ of the largest grid ratio
  double L_argmax = 0.0;
  double sigma2_argmax = 0.0;
  double tail_lambda2_at_theta_max = 0.0;
  double tail_lambda2_at_twice_theta_max = 0.0;
};

/// Bound constants for one tail. For Side::lower these are the upper-tail
/// constants of -f.
struct BoundConstants {
  Side side = Side::upper;
  double K = 1.0;        ///< sup over θ ≥ 0 and x, y of v_θ(x)/v_θ(y)
  double L = 0.0;        ///< sup of |d/dθ v_θ(x)/v_θ(y)|
  double sigma2 = 0.0;   ///< sup over θ ≥ 0 of Λ''(θ)
  double rho_inf = 1.0;  ///< spectral radius of the limit matrix
  double a = 0.0, b = 0.0;            ///< range of f (original orientation)
  double stationary_mean = 0.0;       ///< π(f) (original orientation)
  GridSummary grid;
};

/// Grid-search settings; defaults are the documented search contract.
struct ConstantsOptions {
  double initial_theta_max = 8.0;
  double initial_spacing = 0.25;
  std::size_t max_rounds = 12;
  double relative_change = 1e-6;
  /// Largest neighbour spacing allowed around an interior argmax at stop.
  double argmax_spacing = 1e-3;
};

BoundConstants constants(const MarkovModel& model, Side side, const ConstantsOptions& options = {});

/// Evaluated tail bounds for one (n, μ, side).
struct BoundReport {
  std::int64_t n = 1;
  double mu = 0.0;
  Side side = Side::upper;
  double rate = 0.0;              ///< Λ*(μ)
  double theta_mu = 0.0;
  double chernoff = 0.0;          ///< K e^{-nΛ*(μ)}
  double hoeffding_sigma = 0.0;   ///< K e^{-n(μ-π(f))²/(2σ²)}
  double hoeffding_range = 0.0;   ///< K e^{-2n(μ-π(f))²/(b-a+2KL)²}
  double chernoff_clipped = 0.0;  ///< min(·, 1) versions
  double hoeffding_sigma_clipped = 0.0;
  double hoeffding_range_clipped = 0.0;
  BoundConstants constants;
};

BoundReport chernoff_bound(const MarkovModel& model, std::int64_t n, double mu, Side side);
BoundReport hoeffding_bound(const MarkovModel& model, std::int64_t n, double mu, Side side);
/// Same evaluation with precomputed constants for `constants.side`.
BoundReport evaluate_bounds(const MarkovModel& model, const BoundConstants& constants,
                            std::int64_t n, double mu);

/// 2·max(K_u, K_l)·exp(-n·inf_{μ∈[lo,hi]} Λ*(μ)); needs A1-A4.
double two_sided_bound(const MarkovModel& model, std::int64_t n, double lo, double hi);
double two_sided_bound(const MarkovModel& model, const BoundConstants& upper,
                       const BoundConstants& lower, std::int64_t n, double lo, double hi);

/// log(max(K_u, K_l)) / n; needs A1-A4.
double ergodic_gap(const MarkovModel& model, std::int64_t n);
double ergodic_gap(const BoundConstants& upper, const BoundConstants& lower, std::int64_t n);

}  // namespace tiltbound
