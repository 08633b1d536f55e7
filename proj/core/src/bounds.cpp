#include "tiltbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>

#include "tiltbound/assumptions.hpp"
#include "tiltbound/error.hpp"
#include "tiltbound/perron.hpp"

namespace tiltbound {
namespace {

constexpr const char* kModule = "bounds";

struct Sample {
  double ratio = 1.0;    // max_x v(x) / min_y v(y)
  double deriv = 0.0;    // max |d/dθ v(x)/v(y)|
  double lambda2 = 0.0;  // Λ''(θ)
};

struct Maxima {
  double K = 0.0, L = 0.0, sigma2 = 0.0;
  double K_at = 0.0, L_at = 0.0, sigma2_at = 0.0;
};

// Strict improvement beyond rounding noise.
bool exceeds(double value, double best) { return value > best + 1e-12 * std::abs(best); }

// Running maxima in increasing θ order; near-ties keep the smallest θ.
Maxima maxima_of(const std::map<double, Sample>& samples) {
  Maxima m;
  bool first = true;
  for (const auto& [theta, s] : samples) {
    if (first || exceeds(s.ratio, m.K)) {
      m.K = s.ratio;
      m.K_at = theta;
    }
    if (first || exceeds(s.deriv, m.L)) {
      m.L = s.deriv;
      m.L_at = theta;
    }
    if (first || exceeds(s.lambda2, m.sigma2)) {
      m.sigma2 = s.lambda2;
      m.sigma2_at = theta;
    }
    first = false;
  }
  return m;
}

// Widest gap to a neighbouring sample; the last sample only counts its left
// gap when it is also the first.
double local_spacing(const std::map<double, Sample>& samples, double at) {
  auto it = samples.find(at);
  if (std::next(it) == samples.end()) return 0.0;
  double gap = std::next(it)->first - at;
  if (it != samples.begin()) gap = std::max(gap, at - std::prev(it)->first);
  return gap;
}

bool settled(double now, double before, double tol) {
  return std::abs(now - before) <= tol * std::max(std::abs(now), std::abs(before));
}

void check_n(std::int64_t n) {
  if (n < 1) throw InputError(kModule, "n must be at least 1");
}

double scaled_exp(double K, double exponent) {
  if (exponent == std::numeric_limits<double>::infinity()) return 0.0;
  return K * std::exp(-exponent);
}

}  // namespace

BoundConstants constants(const MarkovModel& model, Side side, const ConstantsOptions& opt) {
  const MarkovModel oriented = model.oriented(side);
  require_side(oriented, Side::upper, kModule);
  const Family fam(oriented);
  const LimitMatrix lim = limit_matrix(oriented, Side::upper);

  const Vector& v_inf = lim.triple.v;
  const double K_limit = *std::max_element(v_inf.begin(), v_inf.end()) /
                         *std::min_element(v_inf.begin(), v_inf.end());

  std::map<double, Sample> samples;
  auto evaluate = [&](double theta) {
    if (samples.count(theta)) return;
    const auto pt = fam.point(theta);
    const Vector& v = pt->triple.v;
    Sample s;
    s.ratio = *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    const double h = default_derivative_step(theta);
    s.deriv = fam.ratio_derivative(theta, h);
    s.lambda2 = fam.lambda_second(theta, h);
    samples.emplace(theta, s);
  };

  double theta_max = opt.initial_theta_max;
  const auto initial = static_cast<std::size_t>(std::llround(theta_max / opt.initial_spacing));
  for (std::size_t i = 0; i <= initial; ++i)
    evaluate(static_cast<double>(i) * opt.initial_spacing);

  Maxima previous = maxima_of(samples);
  GridSummary summary;
  double tail_here = 0.0, tail_twice = 0.0;
  for (std::size_t round = 1; round <= opt.max_rounds; ++round) {
    // Halve the spacing on both sides of each current argmax.
    for (double at : {previous.K_at, previous.L_at, previous.sigma2_at}) {
      auto it = samples.find(at);
      if (it != samples.begin()) evaluate(0.5 * (std::prev(it)->first + at));
      it = samples.find(at);
      if (std::next(it) != samples.end()) evaluate(0.5 * (at + std::next(it)->first));
    }
    // Double the extent with as many points as the initial grid.
    const double step = theta_max / static_cast<double>(initial);
    for (std::size_t i = 1; i <= initial; ++i)
      evaluate(theta_max + static_cast<double>(i) * step);
    theta_max *= 2.0;
    evaluate(theta_max);
    evaluate(2.0 * theta_max);
    tail_here = samples.at(theta_max).lambda2;
    tail_twice = samples.at(2.0 * theta_max).lambda2;

    const Maxima now = maxima_of(samples);
    summary.rounds = round;
    const bool tail_ok = tail_here <= now.sigma2 && tail_twice <= now.sigma2 &&
                         now.sigma2_at < theta_max;
    // A K already reached by the limit vector needs no resolution on the grid.
    const bool K_from_limit = !exceeds(now.K, K_limit);
    const bool resolved = (K_from_limit || local_spacing(samples, now.K_at) <= opt.argmax_spacing) &&
                          local_spacing(samples, now.L_at) <= opt.argmax_spacing &&
                          local_spacing(samples, now.sigma2_at) <= opt.argmax_spacing;
    const bool stable = resolved && settled(now.K, previous.K, opt.relative_change) &&
                        settled(now.L, previous.L, opt.relative_change) &&
                        settled(now.sigma2, previous.sigma2, opt.relative_change);
    previous = now;
    if (stable && tail_ok) {
      summary.converged = true;
      break;
    }
  }

  BoundConstants c;
  c.side = side;
  c.K = std::max({1.0, previous.K, K_limit});
  c.L = previous.L;
  c.sigma2 = previous.sigma2;
  c.rho_inf = lim.triple.rho;
  const LevelSets ls = level_sets(model);
  c.a = ls.a;
  c.b = ls.b;
  c.stationary_mean = dot(fam.point(0.0)->pi_theta, model.observable());

  summary.theta_max = samples.rbegin()->first;
  summary.points = samples.size();
  summary.K_at_limit = K_limit > previous.K;
  summary.K_argmax = previous.K_at;
  summary.L_argmax = previous.L_at;
  summary.sigma2_argmax = previous.sigma2_at;
  summary.tail_lambda2_at_theta_max = tail_here;
  summary.tail_lambda2_at_twice_theta_max = tail_twice;
  c.grid = summary;
  return c;
}

BoundReport evaluate_bounds(const MarkovModel& model, const BoundConstants& c, std::int64_t n,
                            double mu) {
  check_n(n);
  BoundReport r;
  r.n = n;
  r.mu = mu;
  r.side = c.side;
  r.constants = c;

  const RatePoint rate = rate_function(model, mu, c.side);
  r.rate = rate.value;
  r.theta_mu = rate.theta_mu;
  const double nn = static_cast<double>(n);
  const double dev = mu - c.stationary_mean;
  const double dev2 = dev * dev;
  const double inf = std::numeric_limits<double>::infinity();

  r.chernoff = scaled_exp(c.K, nn * r.rate);
  const double sigma_exponent = c.sigma2 > 0.0 ? nn * dev2 / (2.0 * c.sigma2) : (dev2 == 0.0 ? 0.0 : inf);
  r.hoeffding_sigma = scaled_exp(c.K, sigma_exponent);
  const double width = c.b - c.a + 2.0 * c.K * c.L;
  const double range_exponent = width > 0.0 ? 2.0 * nn * dev2 / (width * width) : (dev2 == 0.0 ? 0.0 : inf);
  r.hoeffding_range = scaled_exp(c.K, range_exponent);

  r.chernoff_clipped = std::min(r.chernoff, 1.0);
  r.hoeffding_sigma_clipped = std::min(r.hoeffding_sigma, 1.0);
  r.hoeffding_range_clipped = std::min(r.hoeffding_range, 1.0);
  return r;
}

BoundReport chernoff_bound(const MarkovModel& model, std::int64_t n, double mu, Side side) {
  check_n(n);
  return evaluate_bounds(model, constants(model, side), n, mu);
}

BoundReport hoeffding_bound(const MarkovModel& model, std::int64_t n, double mu, Side side) {
  return chernoff_bound(model, n, mu, side);
}

double two_sided_bound(const MarkovModel& model, std::int64_t n, double lo, double hi) {
  require_side(model, Side::upper, kModule);
  require_side(model, Side::lower, kModule);
  return two_sided_bound(model, constants(model, Side::upper), constants(model, Side::lower), n,
                         lo, hi);
}

double two_sided_bound(const MarkovModel& model, const BoundConstants& upper,
                       const BoundConstants& lower, std::int64_t n, double lo, double hi) {
  check_n(n);
  if (!(lo <= hi)) throw InputError(kModule, "interval must satisfy lo <= hi");
  const double K = std::max(upper.K, lower.K);
  const double pi_f = upper.stationary_mean;
  double infimum = 0.0;
  // Λ* is convex with minimum 0 at π(f): the infimum over [lo, hi] sits at
  // the endpoint nearest π(f).
  if (lo > pi_f)
    infimum = rate_function(model, lo, Side::upper).value;
  else if (hi < pi_f)
    infimum = rate_function(model, hi, Side::lower).value;
  return std::min(2.0 * K, scaled_exp(2.0 * K, static_cast<double>(n) * infimum));
}

double ergodic_gap(const MarkovModel& model, std::int64_t n) {
  check_n(n);
  require_side(model, Side::upper, kModule);
  require_side(model, Side::lower, kModule);
  return ergodic_gap(constants(model, Side::upper), constants(model, Side::lower), n);
}

double ergodic_gap(const BoundConstants& upper, const BoundConstants& lower, std::int64_t n) {
  check_n(n);
  return std::log(std::max(upper.K, lower.K)) / static_cast<double>(n);
}

}  // namespace tiltbound
