// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "tiltbound/assumptions.hpp"
#include "tiltbound/bounds.hpp"
#include "tiltbound/error.hpp"
#include "tiltbound/family.hpp"
#include "tiltbound/sim.hpp"

using namespace tiltbound;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Tracks the worst value of some error measure against a tolerance.
struct Worst {
  double value = 0.0;
  void add(double x) { value = std::max(value, x); }
};

Outcome closed_form_pf() {
  const MarkovModel m({"-1", "1"}, Matrix{{0.5, 0.5}, {1, 0}}, {-1, 1});
  Worst rho_err, ratio_err;
  for (double theta : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const TiltedPoint pt = tilt(m, theta);
    const double rho = std::exp(pt.Lambda);
    const double expected = (1 + std::sqrt(1 + 8 * std::exp(2 * theta))) * std::exp(-theta) / 4;
    rho_err.add(std::abs(rho - expected) / expected);
    ratio_err.add(std::abs(pt.triple.v[0] / pt.triple.v[1] - expected * std::exp(theta)));
  }
  return {rho_err.value <= 1e-10 && ratio_err.value <= 1e-9,
          fmt("max rel err rho %.2e (tol 1e-10)", rho_err.value) +
              fmt(", max abs err v(-1)/v(1) %.2e (tol 1e-9)", ratio_err.value)};
}

Outcome degenerate_family() {
  const MarkovModel m({"-1", "1"}, Matrix{{0, 1}, {1, 0}}, {-1, 1});
  Worst rho_err, v_err;
  for (double theta : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0}) {
    const TiltedPoint pt = tilt(m, theta);
    rho_err.add(std::abs(std::exp(pt.Lambda) - 1.0));
    v_err.add(std::abs(pt.triple.v[0] - (1 + std::exp(theta)) / 2));
    v_err.add(std::abs(pt.triple.v[1] - (1 + std::exp(-theta)) / 2));
  }
  const bool degenerate = detect_degenerate(m);
  return {rho_err.value <= 1e-12 && v_err.value <= 1e-10 && degenerate,
          fmt("max |rho-1| %.2e (tol 1e-12)", rho_err.value) +
              fmt(", max v err %.2e (tol 1e-10)", v_err.value) +
              ", detect_degenerate=" + (degenerate ? "true" : "false")};
}

Outcome iid_reduction() {
  const MarkovModel m = make_model(Matrix{{0.7, 0.3}, {0.7, 0.3}}, {0, 1});
  const BoundConstants up = constants(m, Side::upper), lo = constants(m, Side::lower);
  Worst rate_err;
  for (double mu : {0.4, 0.5, 0.7, 0.9})
    rate_err.add(std::abs(rate_function(m, mu, Side::upper).value - oracle::bernoulli_kl(mu, 0.3)));
  const double K_err = std::max(std::abs(up.K - 1), std::abs(lo.K - 1));
  const double L = std::max(up.L, lo.L);
  return {K_err <= 1e-9 && L <= 1e-6 && rate_err.value <= 1e-8,
          fmt("|K-1| %.2e (tol 1e-9)", K_err) + fmt(", L %.2e (tol 1e-6)", L) +
              fmt(", max rate err %.2e (tol 1e-8)", rate_err.value)};
}

Outcome composition() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> th(-2.0, 2.0);
  Worst err;
  for (int k = 0; k < 20; ++k) {
    const MarkovModel m = oracle::random_irreducible(rng, 3, 5);
    const double t1 = th(rng), t2 = th(rng);
    const TiltedPoint inner = tilt(m, t2);
    const TiltedPoint twice = tilt(m.with_transition(inner.P_theta), t1);
    const TiltedPoint once = tilt(m, t1 + t2);
    err.add(max_abs_difference(twice.P_theta, once.P_theta));
  }
  return {err.value <= 1e-9, fmt("20 models, max entrywise err %.2e (tol 1e-9)", err.value)};
}

Outcome kl_dual() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> th(-3.0, 3.0);
  Worst err;
  for (int k = 0; k < 20; ++k) {
    const MarkovModel m = oracle::random_irreducible(rng, 3, 5);
    const double t1 = th(rng), t2 = th(rng);
    err.add(std::abs(kl_rate(m, t1, t2) - kl_rate_direct(m, t1, t2)));
  }
  return {err.value <= 1e-9, fmt("20 triples, max |formula - direct| %.2e (tol 1e-9)", err.value)};
}

Outcome derivative_checks() {
  std::mt19937_64 rng(1003);
  double worst_ratio = 0.0;  // error / allowed, must stay <= 1
  for (int k = 0; k < 10; ++k) {
    const MarkovModel m = oracle::random_irreducible(rng, 3, 5);
    const Family fam(m);
    for (double theta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
      const double h1 = 1e-5 * (1 + std::abs(theta));
      const double first = (fam.Lambda(theta + h1) - fam.Lambda(theta - h1)) / (2 * h1);
      const double d1 = fam.lambda_prime(theta);
      worst_ratio = std::max(worst_ratio, std::abs(d1 - first) / std::max(1e-6, 1e-3 * std::abs(d1)));
      const double h2 = 1e-3 * (1 + std::abs(theta));
      const double second =
          (fam.Lambda(theta + h2) - 2 * fam.Lambda(theta) + fam.Lambda(theta - h2)) / (h2 * h2);
      const double d2 = fam.lambda_second(theta);
      worst_ratio = std::max(worst_ratio, std::abs(d2 - second) / std::max(1e-6, 1e-3 * std::abs(d2)));
    }
  }
  return {worst_ratio <= 1.0,
          fmt("10 models x 5 thetas, worst err/tolerance %.3f (must be <= 1)", worst_ratio)};
}

Outcome pinsker_hoeffding() {
  std::mt19937_64 rng(1004);
  double worst_pinsker = INFINITY, worst_lemma = INFINITY;
  for (int k = 0; k < 10; ++k) {
    const MarkovModel m = oracle::random_assumption_model(rng, 3, 5);
    const BoundConstants up = constants(m, Side::upper), lo = constants(m, Side::lower);
    const Family fam(m);
    const double pi_f = up.stationary_mean;
    for (double mu : linear_grid(pi_f, up.b, 50)) {
      const double rate = rate_function(fam, mu, Side::upper).value;
      worst_pinsker = std::min(worst_pinsker, rate - (mu - pi_f) * (mu - pi_f) / (2 * up.sigma2));
    }
    const double s2 = std::max(up.sigma2, lo.sigma2);
    for (double theta : linear_grid(-4, 4, 81))
      worst_lemma = std::min(worst_lemma, pi_f * theta + s2 * theta * theta / 2 - fam.Lambda(theta));
  }
  return {worst_pinsker >= -1e-9 && worst_lemma >= -1e-9,
          fmt("10 models, min Pinsker slack %.2e", worst_pinsker) +
              fmt(", min Hoeffding-lemma slack %.2e (tol -1e-9)", worst_lemma)};
}

Outcome ergodic_theorem() {
  std::mt19937_64 rng(1005);
  double worst = INFINITY;  // bound + 1e-9 - gap
  for (int k = 0; k < 10; ++k) {
    const MarkovModel m = oracle::random_assumption_model(rng, 3, 5);
    const double K = std::max(constants(m, Side::upper).K, constants(m, Side::lower).K);
    for (double theta : {-2.0, -1.0, 1.0, 2.0}) {
      const double Lambda = tilt(m, theta).Lambda;
      for (int n = 1; n <= 100; ++n) {
        const double gap = std::abs(lambda_n_exact(m, theta, n) - Lambda);
        worst = std::min(worst, std::log(K) / n + 1e-9 - gap);
      }
    }
  }
  return {worst >= 0.0, fmt("10 models x 4 thetas x n=1..100, min slack %.2e (must be >= 0)", worst)};
}

Outcome monte_carlo() {
  const MarkovModel m = make_model(Matrix{{0.7, 0.3}, {0.3, 0.7}}, {0, 1});
  const BoundConstants c = constants(m, Side::upper);
  bool ok = true;
  std::string detail;
  for (double mu : {0.6, 0.7, 0.8}) {
    const BoundReport r = evaluate_bounds(m, c, 50, mu);
    const TailEstimate t = empirical_tail(m, 50, mu, Side::upper, 100000, 20240601);
    ok = ok && t.ci_low <= r.chernoff && r.chernoff <= r.hoeffding_sigma &&
         r.chernoff <= r.hoeffding_range;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%smu=%.1f ci_low %.4g <= chernoff %.4g <= (%.4g, %.4g)",
                  detail.empty() ? "" : "; ", mu, t.ci_low, r.chernoff, r.hoeffding_sigma,
                  r.hoeffding_range);
    detail += buf;
  }
  return {ok, detail};
}

Outcome boundary_rate() {
  const MarkovModel m = make_model(Matrix{{0.7, 0.3}, {0.3, 0.7}}, {0, 1});
  const double rate_err = std::abs(rate_function(m, 1.0, Side::upper).value + std::log(0.7));
  const double K = std::max(constants(m, Side::upper).K, constants(m, Side::lower).K);
  Worst rel;
  for (int n : {1, 10, 50}) {
    const double expected = 2 * K * std::pow(0.7, n);
    rel.add(std::abs(two_sided_bound(m, n, 1.0, 1.0) - expected) / expected);
  }
  return {rate_err <= 1e-9 && rel.value <= 1e-9,
          fmt("|rate(1) + log 0.7| %.2e (tol 1e-9)", rate_err) +
              fmt(", two-sided rel err %.2e (tol 1e-9)", rel.value)};
}

Outcome counterexamples() {
  const MarkovModel first({"-1", "1"}, Matrix{{0.5, 0.5}, {1, 0}}, {-1, 1});
  const MarkovModel bd({"-1", "0", "1"}, Matrix{{0.5, 0.5, 0}, {0.5, 0, 0.5}, {0, 0.5, 0.5}},
                       {1, 0, -1});
  const AssumptionReport r1 = validate(first), r2 = validate(bd);
  auto witness = [](const MarkovModel& m, const AssumptionReport& r, int id) {
    for (const auto& v : r.violations)
      if (v.id == id && v.states.size() == 1) return m.states()[v.states[0]];
    return std::string("?");
  };
  const std::string w1 = witness(first, r1, 1), w2 = witness(bd, r2, 2);
  return {!r1.a1 && w1 == "1" && !r2.a2 && r2.a1 && w2 == "1",
          "first example A1=" + std::string(r1.a1 ? "true" : "false") + " witness state " + w1 +
              "; birth-death A2=" + (r2.a2 ? "true" : "false") + " witness state " + w2};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"closed-form PF oracle", closed_form_pf},
      {"degenerate family", degenerate_family},
      {"IID reduction", iid_reduction},
      {"composition", composition},
      {"KL dual check", kl_dual},
      {"derivative cross-checks", derivative_checks},
      {"Pinsker and Hoeffding lemma", pinsker_hoeffding},
      {"uniform ergodic theorem", ergodic_theorem},
      {"Monte Carlo consistency", monte_carlo},
      {"boundary rate", boundary_rate},
      {"assumption counterexamples", counterexamples},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
