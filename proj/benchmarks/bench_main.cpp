#include <benchmark/benchmark.h>

#include <random>

#include "tiltbound/bounds.hpp"
#include "tiltbound/family.hpp"
#include "tiltbound/perron.hpp"
#include "tiltbound/sim.hpp"

using namespace tiltbound;

namespace {

// Dense positive chain with an integer-valued observable.
MarkovModel random_chain(std::size_t s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Matrix p(s, s);
  Vector f(s);
  for (std::size_t x = 0; x < s; ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < s; ++y) total += p(x, y) = u(rng);
    for (std::size_t y = 0; y < s; ++y) p(x, y) /= total;
    f[x] = static_cast<double>(x % 4);
  }
  return make_model(std::move(p), std::move(f));
}

const MarkovModel& two_state() {
  static const MarkovModel m = make_model(Matrix{{0.7, 0.3}, {0.3, 0.7}}, {0, 1});
  return m;
}

void BM_PfIrreducible(benchmark::State& state) {
  const MarkovModel m = random_chain(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(pf_irreducible(m.transition()));
}
BENCHMARK(BM_PfIrreducible)->Arg(2)->Arg(8)->Arg(32);

void BM_Tilt(benchmark::State& state) {
  const MarkovModel m = random_chain(8, 11);
  for (auto _ : state) benchmark::DoNotOptimize(tilt(m, 1.5));
}
BENCHMARK(BM_Tilt);

void BM_Constants(benchmark::State& state) {
  const MarkovModel m = random_chain(static_cast<std::size_t>(state.range(0)), 13);
  for (auto _ : state) benchmark::DoNotOptimize(constants(m, Side::upper));
}
BENCHMARK(BM_Constants)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_RateFunction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rate_function(two_state(), 0.8, Side::upper));
}
BENCHMARK(BM_RateFunction);

void BM_LambdaNExact(benchmark::State& state) {
  const MarkovModel m = random_chain(8, 17);
  for (auto _ : state) benchmark::DoNotOptimize(lambda_n_exact(m, 1.0, state.range(0)));
}
BENCHMARK(BM_LambdaNExact)->Arg(10)->Arg(100)->Arg(1000);

void BM_EmpiricalTail(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(empirical_tail(two_state(), 50, 0.7, Side::upper, state.range(0), 1));
}
BENCHMARK(BM_EmpiricalTail)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
