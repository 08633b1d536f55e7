#include "tiltbound/sim.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <bit>
#include <cmath>

#include "tiltbound/assumptions.hpp"
#include "tiltbound/bounds.hpp"
#include "tiltbound/error.hpp"
#include "tiltbound/family.hpp"

namespace tiltbound {
namespace {

constexpr const char* kModule = "sim";
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Rng Rng::for_trial(std::uint64_t seed, std::uint64_t index) { return Rng(seed + index * kGolden); }

std::size_t sample_categorical(std::span<const double> p, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) last_positive = i;
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  // Row sums can fall short of 1 by rounding.
  return last_positive;
}

std::vector<std::size_t> sample_trajectory(const MarkovModel& model, std::size_t n, Rng& rng) {
  std::vector<std::size_t> path;
  path.reserve(n + 1);
  path.push_back(sample_categorical(model.initial(), rng));
  for (std::size_t k = 0; k < n; ++k)
    path.push_back(sample_categorical(model.transition().row(path.back()), rng));
  return path;
}

Interval clopper_pearson(std::uint64_t hits, std::uint64_t trials, double confidence) {
  if (trials == 0 || hits > trials) throw InputError(kModule, "need 0 <= hits <= trials, trials >= 1");
  const double alpha = 1.0 - confidence;
  const auto x = static_cast<double>(hits);
  const auto n = static_cast<double>(trials);
  Interval ci;
  ci.lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  ci.hi = hits == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return ci;
}

TailEstimate empirical_tail(const MarkovModel& model, std::int64_t n, double mu, Side side,
                            std::uint64_t trials, std::uint64_t seed) {
  if (n < 1) throw InputError(kModule, "n must be at least 1");
  if (trials < 1) throw InputError(kModule, "trials must be at least 1");
  const Vector& f = model.observable();
  const Matrix& p = model.transition();
  const double nn = static_cast<double>(n);

  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = Rng::for_trial(seed, t);
    std::size_t x = sample_categorical(model.initial(), rng);
    double total = 0.0;
    for (std::int64_t k = 0; k < n; ++k) {
      x = sample_categorical(p.row(x), rng);
      total += f[x];
    }
    const double mean = total / nn;
    if (side == Side::upper ? mean >= mu : mean <= mu) ++hits;
  }

  TailEstimate est;
  est.n = n;
  est.mu = mu;
  est.side = side;
  est.trials = trials;
  est.hits = hits;
  est.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  const Interval ci = clopper_pearson(hits, trials);
  est.ci_low = std::min(ci.lo, est.p_hat);
  est.ci_high = std::max(ci.hi, est.p_hat);
  est.seed = seed;
  return est;
}

double lambda_n_exact(const MarkovModel& model, double theta, std::int64_t n) {
  if (n < 1) throw InputError(kModule, "n must be at least 1");
  if (!std::isfinite(theta)) throw InputError(kModule, "theta must be finite");
  const Vector& f = model.observable();
  const double slope = theta >= 0.0 ? *std::max_element(f.begin(), f.end())
                                    : *std::min_element(f.begin(), f.end());
  const std::size_t s = model.size();
  Matrix m(s, s);
  for (std::size_t y = 0; y < s; ++y) {
    const double w = std::exp(theta * (f[y] - slope));
    for (std::size_t x = 0; x < s; ++x) m(x, y) = model.transition()(x, y) * w;
  }

  Vector w = model.initial();
  double log_scale = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    w = left_multiply(w, m);
    const double norm = sup_norm(w);
    if (!(norm > 0.0)) throw NumericalError(kModule, "moment recursion underflowed");
    for (double& x : w) x /= norm;
    log_scale += std::log(norm);
  }
  const double nn = static_cast<double>(n);
  return (log_scale + std::log(sum(w))) / nn + theta * slope;
}

ErgodicCheck ergodic_check(const MarkovModel& model, double theta, std::int64_t n) {
  require_side(model, Side::upper, kModule);
  require_side(model, Side::lower, kModule);
  const double K = std::max(constants(model, Side::upper).K, constants(model, Side::lower).K);
  return ergodic_check(model, theta, n, K);
}

ErgodicCheck ergodic_check(const MarkovModel& model, double theta, std::int64_t n, double K) {
  ErgodicCheck c;
  c.theta = theta;
  c.n = n;
  c.Lambda_n = lambda_n_exact(model, theta, n);
  c.Lambda = tilt(model, theta).Lambda;
  c.gap = std::abs(c.Lambda_n - c.Lambda);
  c.bound = std::log(K) / static_cast<double>(n);
  c.pass = c.gap <= c.bound + 1e-9;
  return c;
}

}  // namespace tiltbound
