#include "tiltbound/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tiltbound/assumptions.hpp"
#include "tiltbound/error.hpp"

namespace tiltbound {
namespace {

constexpr const char* kModule = "family";
constexpr double kInf = std::numeric_limits<double>::infinity();

// Degeneracy thresholds: P_1 must match P and Λ'' must vanish at θ = -1, 0, 1.
constexpr double kDegenerateMatrixTol = 1e-10;
constexpr double kDegenerateCurvatureTol = 1e-10;

std::string num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

Matrix rescaled_tilt(const MarkovModel& model, double theta, double slope) {
  const Matrix& p = model.transition();
  const Vector& f = model.observable();
  const std::size_t n = model.size();
  Matrix m(n, n);
  for (std::size_t y = 0; y < n; ++y) {
    const double w = std::exp(theta * (f[y] - slope));
    for (std::size_t x = 0; x < n; ++x) m(x, y) = p(x, y) * w;
  }
  return m;
}

// PF triple of a rescaled tilt. Far out in θ some entries underflow to zero;
// then the matrix is (numerically) the limit matrix and the extended triple
// applies, or, with partial underflow, the closed-core triple.
PerronTriple solve_rescaled(const Matrix& m, double theta) {
  if (is_irreducible(m)) return pf_irreducible(m);
  BlockStructure structure;
  if (infer_structure(m, structure)) return pf_extended(m, structure);
  try {
    return pf_closed_core(m);
  } catch (const NumericalError& e) {
    throw NumericalError(kModule, "tilt at theta = " + num(theta) +
                                      " underflowed to a matrix without Perron structure: " +
                                      e.what());
  }
}

TiltedPoint make_point(const MarkovModel& model, double theta, double a, double b) {
  if (!std::isfinite(theta)) throw InputError(kModule, "theta must be finite");
  const double slope = theta >= 0.0 ? b : a;
  const Matrix m = rescaled_tilt(model, theta, slope);
  TiltedPoint pt;
  pt.theta = theta;
  pt.log_shift = theta * slope;
  pt.triple = solve_rescaled(m, theta);

  const std::size_t n = model.size();
  const Vector& v = pt.triple.v;
  pt.P_theta = Matrix(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      pt.P_theta(x, y) = m(x, y) * v[y] / (pt.triple.rho * v[x]);
  pt.pi_theta.resize(n);
  for (std::size_t x = 0; x < n; ++x) pt.pi_theta[x] = pt.triple.u[x] * v[x];
  pt.Lambda = pt.log_shift + std::log(pt.triple.rho);
  pt.mean = dot(pt.pi_theta, model.observable());
  return pt;
}

void bounds_of(const Vector& f, double& a, double& b) {
  a = *std::min_element(f.begin(), f.end());
  b = *std::max_element(f.begin(), f.end());
}

// Upper-tail rate for a family whose observable is already oriented.
RatePoint rate_upper(const Family& fam, double mu) {
  require_side(fam.model(), Side::upper, kModule);
  const double pi_f = fam.lambda_prime(0.0);
  const double b = fam.b();
  const double tie = 1e-14 * (1.0 + std::abs(pi_f));
  if (!std::isfinite(mu)) throw InputError(kModule, "mu must be finite");
  if (mu < pi_f - tie)
    throw InputError(kModule, "mu = " + num(mu) + " is on the wrong side of the stationary mean " +
                                  num(pi_f));
  if (std::abs(mu - pi_f) <= tie) return {mu, 0.0, 0.0};
  if (mu > b) return {mu, kInf, kInf};
  if (detect_degenerate(fam)) return {mu, kInf, kInf};
  if (mu == b) {
    const LimitMatrix lim = limit_matrix(fam.model(), Side::upper);
    return {mu, kInf, -std::log(lim.triple.rho)};
  }
  const double theta = theta_of_mean(fam, mu);
  const double value = theta * mu - fam.Lambda(theta);
  return {mu, theta, std::max(0.0, value)};
}

}  // namespace

double default_derivative_step(double theta) { return 1e-5 * (1.0 + std::abs(theta)); }

double default_crosscheck_step(double /*theta*/) { return 2e-4; }

Family::Family(MarkovModel model) : model_(std::move(model)) {
  if (!is_irreducible(model_.transition()))
    throw AssumptionError(kModule, "transition matrix is not irreducible");
  bounds_of(model_.observable(), a_, b_);
}

std::shared_ptr<const TiltedPoint> Family::point(double theta) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(theta); it != cache_.end()) return it->second;
  }
  auto pt = std::make_shared<const TiltedPoint>(make_point(model_, theta, a_, b_));
  std::lock_guard lock(mutex_);
  return cache_.emplace(theta, std::move(pt)).first->second;
}

std::size_t Family::cache_size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

double Family::log_rescaled_radius(double theta, double slope) const {
  return std::log(solve_rescaled(rescaled_tilt(model_, theta, slope), theta).rho);
}

double Family::lambda_second(double theta, double h) const {
  if (!(h > 0.0)) throw InputError(kModule, "finite-difference step must be positive");
  const auto here = point(theta);
  const auto plus = point(theta + h);
  const auto minus = point(theta - h);
  const std::size_t n = model_.size();
  const Vector& f = model_.observable();
  const Vector& v = here->triple.v;

  // Random variable g(X,Y) = f(Y) + v(X)/v(Y) · d/dθ [v(Y)/v(X)] under π_θ ⊙ P_θ.
  double mean = 0.0, second = 0.0;
  std::vector<double> g(n * n, 0.0), w(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double weight = here->pi_theta[x] * here->P_theta(x, y);
      if (!(weight > 0.0)) continue;
      const double rp = plus->triple.v[y] / plus->triple.v[x];
      const double rm = minus->triple.v[y] / minus->triple.v[x];
      const double d = (rp - rm) / (2.0 * h);
      g[x * n + y] = f[y] + v[x] / v[y] * d;
      w[x * n + y] = weight;
      mean += weight * g[x * n + y];
    }
  for (std::size_t k = 0; k < n * n; ++k)
    if (w[k] > 0.0) second += w[k] * (g[k] - mean) * (g[k] - mean);
  const double value = second;

  // Second central difference of Λ with a common rescaling slope, so the
  // linear part cancels exactly.
  const double step = default_crosscheck_step(theta);
  const double slope = theta >= 0.0 ? b_ : a_;
  const double l0 = std::log(here->triple.rho);
  const double lp = log_rescaled_radius(theta + step, slope);
  const double lm = log_rescaled_radius(theta - step, slope);
  const double check = (lp - 2.0 * l0 + lm) / (step * step);
  const double tol = std::max(1e-6, 1e-3 * std::abs(value));
  if (!(std::abs(value - check) <= tol))
    throw NumericalError(kModule, "Lambda'' cross-check failed at theta = " + num(theta) +
                                      ": variance formula " + num(value) +
                                      " vs second difference " + num(check));
  return value;
}

double Family::ratio_derivative(double theta, double h) const {
  const auto plus = point(theta + h);
  const auto minus = point(theta - h);
  const std::size_t n = model_.size();
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      if (x == y) continue;
      const double rp = plus->triple.v[x] / plus->triple.v[y];
      const double rm = minus->triple.v[x] / minus->triple.v[y];
      best = std::max(best, std::abs(rp - rm) / (2.0 * h));
    }
  return best;
}

TiltedPoint tilt(const MarkovModel& model, double theta) {
  if (!is_irreducible(model.transition()))
    throw AssumptionError(kModule, "transition matrix is not irreducible");
  double a, b;
  bounds_of(model.observable(), a, b);
  return make_point(model, theta, a, b);
}

double lambda_prime(const TiltedPoint& point, const MarkovModel& model) {
  return dot(point.pi_theta, model.observable());
}

double lambda_second(const MarkovModel& model, double theta, double h) {
  return Family(model).lambda_second(theta, h);
}

double lambda_second(const MarkovModel& model, double theta) {
  return Family(model).lambda_second(theta);
}

double theta_of_mean(const MarkovModel& model, double mu) {
  return theta_of_mean(Family(model), mu);
}

double theta_of_mean(const Family& fam, double mu) {
  if (detect_degenerate(fam))
    throw InputError(kModule, "degenerate family: the mean map is constant and cannot be inverted");
  const MeanSet ms = mean_set(fam);
  if (!(mu > ms.lo && mu < ms.hi))
    throw InputError(kModule, "mu = " + num(mu) + " is not inside the open mean set (" + num(ms.lo) +
                                  ", " + num(ms.hi) + ")");

  const MarkovModel& model = fam.model();
  auto mean_at = [&](double theta) { return make_point(model, theta, fam.a(), fam.b()).mean; };

  double lo = -1.0, hi = 1.0;
  double f_hi = mean_at(hi), f_lo = mean_at(lo);
  for (int k = 0; f_hi < mu; ++k) {
    if (k == 60) throw NumericalError(kModule, "could not bracket mu = " + num(mu));
    lo = hi;
    f_lo = f_hi;
    hi *= 2.0;
    f_hi = mean_at(hi);
  }
  for (int k = 0; f_lo > mu; ++k) {
    if (k == 60) throw NumericalError(kModule, "could not bracket mu = " + num(mu));
    hi = lo;
    f_hi = f_lo;
    lo *= 2.0;
    f_lo = mean_at(lo);
  }

  for (int it = 0; it < 400; ++it) {
    const double width = hi - lo;
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(lo), std::abs(hi));
    if (width <= std::max(1e-12, floor)) break;
    const double mid = lo + 0.5 * width;
    const double f_mid = mean_at(mid);
    if (f_mid == mu) return mid;
    if (f_mid < mu) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  double best = std::abs(f_lo - mu) <= std::abs(f_hi - mu) ? lo : hi;
  double best_err = std::min(std::abs(f_lo - mu), std::abs(f_hi - mu));
  if (f_hi != f_lo) {
    const double secant = lo - (f_lo - mu) * (hi - lo) / (f_hi - f_lo);
    if (secant >= lo && secant <= hi) {
      const double err = std::abs(mean_at(secant) - mu);
      if (err < best_err) {
        best = secant;
        best_err = err;
      }
    }
  }
  if (!(best_err <= 1e-10 * (1.0 + std::abs(mu))))
    throw NumericalError(kModule, "mean inversion missed mu = " + num(mu) + " by " + num(best_err));
  return best;
}

double kl_rate(const MarkovModel& model, double theta1, double theta2) {
  return kl_rate(Family(model), theta1, theta2);
}

double kl_rate(const Family& fam, double theta1, double theta2) {
  const auto p1 = fam.point(theta1);
  const auto p2 = fam.point(theta2);
  return p2->Lambda - p1->Lambda - p1->mean * (theta2 - theta1);
}

double kl_rate_direct(const MarkovModel& model, double theta1, double theta2) {
  const TiltedPoint p1 = tilt(model, theta1);
  const TiltedPoint p2 = tilt(model, theta2);
  const std::size_t n = model.size();
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) {
      const double q = p1.P_theta(x, y);
      if (!(q > 0.0)) continue;
      const double r = p2.P_theta(x, y);
      if (!(r > 0.0)) return kInf;
      total += p1.pi_theta[x] * q * std::log(q / r);
    }
  return total;
}

bool detect_degenerate(const MarkovModel& model) { return detect_degenerate(Family(model)); }

bool detect_degenerate(const Family& fam) {
  const auto p1 = fam.point(1.0);
  if (max_abs_difference(p1->P_theta, fam.model().transition()) > kDegenerateMatrixTol) return false;
  for (double theta : {-1.0, 0.0, 1.0})
    if (std::abs(fam.lambda_second(theta)) >= kDegenerateCurvatureTol) return false;
  return true;
}

double max_cycle_mean(const Matrix& pattern, std::span<const double> f) {
  // Karp: D_k(v) = best weight of a k-edge walk from state 0 ending at v,
  // with weight f(y) on edge x -> y.
  const std::size_t n = pattern.rows();
  const double neg = -kInf;
  std::vector<Vector> d(n + 1, Vector(n, neg));
  d[0][0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t x = 0; x < n; ++x) {
      if (d[k - 1][x] == neg) continue;
      for (std::size_t y = 0; y < n; ++y)
        if (pattern(x, y) > 0.0) d[k][y] = std::max(d[k][y], d[k - 1][x] + f[y]);
    }
  double best = neg;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == neg) continue;
    double worst = kInf;
    for (std::size_t k = 0; k < n; ++k)
      if (d[k][v] != neg)
        worst = std::min(worst, (d[n][v] - d[k][v]) / static_cast<double>(n - k));
    best = std::max(best, worst);
  }
  return best;
}

MeanSet mean_set(const MarkovModel& model) { return mean_set(Family(model)); }

MeanSet mean_set(const Family& fam) {
  MeanSet ms;
  ms.stationary_mean = fam.lambda_prime(0.0);
  ms.degenerate = detect_degenerate(fam);
  if (ms.degenerate) {
    ms.lo = ms.hi = ms.stationary_mean;
    return ms;
  }
  const Matrix& p = fam.model().transition();
  Vector neg(fam.model().observable());
  for (double& x : neg) x = -x;
  const double a = fam.a(), b = fam.b();
  double hi = std::clamp(max_cycle_mean(p, fam.model().observable()), a, b);
  double lo = std::clamp(-max_cycle_mean(p, neg), a, b);
  // Cycle means are averages of f-values; snap rounding noise onto a and b.
  if (std::abs(hi - b) <= 1e-12 * (1.0 + std::abs(b))) hi = b;
  if (std::abs(lo - a) <= 1e-12 * (1.0 + std::abs(a))) lo = a;
  ms.lo = lo;
  ms.hi = hi;
  return ms;
}

RatePoint rate_function(const MarkovModel& model, double mu, Side side) {
  if (side == Side::upper) return rate_upper(Family(model), mu);
  RatePoint r = rate_upper(Family(model.negated()), -mu);
  return {mu, -r.theta_mu, r.value};
}

RatePoint rate_function(const Family& fam, double mu, Side side) {
  if (side == Side::upper) return rate_upper(fam, mu);
  RatePoint r = rate_upper(Family(fam.model().negated()), -mu);
  return {mu, -r.theta_mu, r.value};
}

SpectralCurve spectral_curve(const MarkovModel& model, std::span<const double> grid) {
  const Family fam(model);
  SpectralCurve c;
  for (double theta : grid) {
    const auto pt = fam.point(theta);
    c.grid.push_back(theta);
    c.Lambda.push_back(pt->Lambda);
    c.Lambda1.push_back(pt->mean);
    c.Lambda2.push_back(fam.lambda_second(theta));
  }
  return c;
}

Vector linear_grid(double lo, double hi, std::size_t count) {
  Vector g;
  if (count == 0) return g;
  if (count == 1) return {lo};
  g.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    g.push_back(i + 1 == count ? hi
                               : lo + (hi - lo) * static_cast<double>(i) /
                                          static_cast<double>(count - 1));
  return g;
}

}  // namespace tiltbound
