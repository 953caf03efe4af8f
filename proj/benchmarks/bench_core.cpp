#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "sdom/covering.hpp"
#include "sdom/generators.hpp"
#include "sdom/operators.hpp"
#include "sdom/space.hpp"
#include "sdom/stopping.hpp"

namespace {

std::shared_ptr<const sdom::Space> line(double extent) {
  sdom::GridSpec g;
  g.exponents = {1.0};
  g.step = 1.0;
  g.extent = {extent};
  return std::make_shared<const sdom::Space>(sdom::Space::grid(g));
}

std::vector<double> random_abs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> f(n);
  for (auto& v : f) v = e(rng);
  return f;
}

void BM_WhitneyCover(benchmark::State& state) {
  const auto X = line(static_cast<double>(state.range(0)));
  std::vector<char> region(X->size(), 0);
  X->for_each_in_ball(X->origin(), 0.8 * static_cast<double>(state.range(0)),
                      [&](sdom::Index y, double) { region[static_cast<std::size_t>(y)] = 1; });
  for (auto _ : state) benchmark::DoNotOptimize(sdom::whitney_cover(*X, region, 6.0));
}
BENCHMARK(BM_WhitneyCover)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_MaximalFn(benchmark::State& state) {
  const auto X = line(static_cast<double>(state.range(0)));
  const auto f = random_abs(X->size(), 1);
  for (auto _ : state) benchmark::DoNotOptimize(sdom::maximal_fn(*X, f, 2.0));
}
BENCHMARK(BM_MaximalFn)->Arg(1024)->Arg(4096)->Arg(16384);

void BM_HilbertApply(benchmark::State& state) {
  const auto X = line(static_cast<double>(state.range(0)));
  const auto T = sdom::cz_family(X, sdom::hilbert_kernel(*X));
  sdom::GridFunction f(X->size());
  const auto a = random_abs(X->size(), 2);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = a[i];
  for (auto _ : state) benchmark::DoNotOptimize(T->apply_range(0, 6, f));
}
BENCHMARK(BM_HilbertApply)->Arg(1024)->Arg(4096);

void BM_StoppingLadder(benchmark::State& state) {
  const auto X = line(static_cast<double>(state.range(0)));
  const auto root = sdom::dyadic_ball(*X, X->origin(), static_cast<int>(std::log2(state.range(0))) - 3);
  sdom::StoppingConfig cfg;
  cfg.c_o = 4.0;
  const auto f1 = random_abs(X->size(), 3), f2 = random_abs(X->size(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(sdom::build_stopping_ladder(*X, f1, f2, root, cfg));
}
BENCHMARK(BM_StoppingLadder)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
