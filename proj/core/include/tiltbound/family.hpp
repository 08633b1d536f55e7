#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "tiltbound/model.hpp"
#include "tiltbound/perron.hpp"

namespace tiltbound {

/// One member of the exponential family generated by (P, f).
///
/// The PF problem is solved for the rescaled matrix e^{-c} P̃_θ with
/// c = θ·max f for θ ≥ 0 and c = θ·min f for θ < 0, so every entry is at most
/// 1 and nothing overflows. `triple` belongs to that rescaled matrix; its
/// eigenvectors coincide with those of P̃_θ and ρ(θ) = e^{c}·triple.rho.
struct TiltedPoint {
  double theta = 0.0;
  double log_shift = 0.0;   ///< c above
  PerronTriple triple;
  Matrix P_theta;           ///< P(x,y) e^{θf(y)} v(y) / (ρ(θ) v(x))
  Vector pi_theta;          ///< u ⊙ v, stationary for P_theta
  double Lambda = 0.0;      ///< log ρ(θ)
  double mean = 0.0;        ///< π_θ(f) = Λ'(θ)
};

/// Samples of Λ, Λ', Λ'' on an increasing grid.
struct SpectralCurve {
  Vector grid, Lambda, Lambda1, Lambda2;
};

/// Closure of the mean-parameter interval together with the stationary mean.
struct MeanSet {
  double lo = 0.0;
  double hi = 0.0;
  bool degenerate = false;
  double stationary_mean = 0.0;
};

/// Λ*(μ) and its maximizing θ (±infinity at the boundary of the mean set).
struct RatePoint {
  double mu = 0.0;
  double theta_mu = 0.0;
  double value = 0.0;
};

/// Default finite-difference step for the eigenvector-ratio derivative.
double default_derivative_step(double theta);
/// Step used for the Λ'' cross-check against a second difference of Λ.
double default_crosscheck_step(double theta);

/// Handle on the exponential family of one model. Tilted points are memoized
/// by θ; the cache is guarded so a handle can be shared across threads.
class Family {
 public:
  explicit Family(MarkovModel model);

  const MarkovModel& model() const noexcept { return model_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  std::shared_ptr<const TiltedPoint> point(double theta) const;

  double Lambda(double theta) const { return point(theta)->Lambda; }
  double lambda_prime(double theta) const { return point(theta)->mean; }

  /// log ρ(e^{-θ·slope} P̃_θ); Λ(θ) = θ·slope + this. Not cached.
  double log_rescaled_radius(double theta, double slope) const;

  /// Λ''(θ) from the variance representation with a central-difference
  /// derivative of eigenvector ratios at step h. Cross-checked against a
  /// second difference of Λ; throws NumericalError on disagreement.
  double lambda_second(double theta, double h) const;
  double lambda_second(double theta) const {
    return lambda_second(theta, default_derivative_step(theta));
  }

  /// max over x,y of |d/dθ v_θ(x)/v_θ(y)| by central difference at step h.
  double ratio_derivative(double theta, double h) const;

  std::size_t cache_size() const;

 private:
  MarkovModel model_;
  double a_ = 0.0, b_ = 0.0;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const TiltedPoint>> cache_;
};

/// P_θ built directly (uncached). tilt(model, 0) reproduces P with ρ = 1.
TiltedPoint tilt(const MarkovModel& model, double theta);

/// π_θ(f) = Σ_x π_θ(x) f(x).
double lambda_prime(const TiltedPoint& point, const MarkovModel& model);

double lambda_second(const MarkovModel& model, double theta, double h);
double lambda_second(const MarkovModel& model, double theta);

/// θ with Λ'(θ) = μ, for μ strictly inside the mean set of a nondegenerate
/// family. Bracket expansion from [-1, 1] then bisection and a secant polish.
double theta_of_mean(const MarkovModel& model, double mu);
double theta_of_mean(const Family& family, double mu);

/// Relative entropy rate K(θ1‖θ2) via Λ(θ2) − Λ(θ1) − Λ'(θ1)(θ2 − θ1).
double kl_rate(const MarkovModel& model, double theta1, double theta2);
double kl_rate(const Family& family, double theta1, double theta2);
/// The same quantity as the direct sum Σ π1(x) P1(x,y) log(P1(x,y)/P2(x,y)).
double kl_rate_direct(const MarkovModel& model, double theta1, double theta2);

/// True iff every tilt returns the generator chain (Λ linear).
bool detect_degenerate(const MarkovModel& model);
bool detect_degenerate(const Family& family);

/// Maximum mean of f over cycles of the positivity digraph (Karp's
/// algorithm); equals lim_{θ→∞} Λ'(θ). The minimum is the negation applied
/// to -f.
double max_cycle_mean(const Matrix& pattern, std::span<const double> f);

MeanSet mean_set(const MarkovModel& model);
MeanSet mean_set(const Family& family);

/// Λ*(μ) for the given side. Needs the side's assumptions and μ on the side's
/// half-line of the stationary mean. μ equal to the extreme value of f gives
/// −log ρ(P̄_∞); beyond it the rate is +infinity.
RatePoint rate_function(const MarkovModel& model, double mu, Side side);
RatePoint rate_function(const Family& family, double mu, Side side);

SpectralCurve spectral_curve(const MarkovModel& model, std::span<const double> grid);

/// Evenly spaced grid lo, ..., hi with `count` points.
Vector linear_grid(double lo, double hi, std::size_t count);

}  // namespace tiltbound
