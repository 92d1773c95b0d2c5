// Serial reference vs OpenMP kernels.
#include <benchmark/benchmark.h>

#include <numeric>

#include "driftrules/cart.hpp"
#include "driftrules/data_shift.hpp"
#include "driftrules/kernels.hpp"
#include "driftrules/ruleset.hpp"

using namespace driftrules;

namespace {

struct Fixture {
  Matrix x;
  std::vector<int> y;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> features;
};

Fixture make_fixture(std::size_t n, std::size_t d) {
  Fixture f{Matrix(n, d), std::vector<int>(n), std::vector<std::size_t>(n), std::vector<std::size_t>(d)};
  Rng rng(7);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      f.x.at(i, j) = rng.normal();
      s += f.x.at(i, j) * static_cast<double>(j % 3);
    }
    f.y[i] = s + rng.normal() > 0 ? 1 : 0;
  }
  std::iota(f.rows.begin(), f.rows.end(), 0);
  std::iota(f.features.begin(), f.features.end(), 0);
  return f;
}

void BM_BestSplitParallel(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::best_split(f.x, f.y, f.rows, f.features, 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

// The serial reference recounts each threshold from scratch, so it is kept small.
void BM_BestSplitSerial(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::best_split(f.x, f.y, f.rows, f.features, 5));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ColumnMeansParallel(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 100);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::column_means(f.x));
}

void BM_ColumnMeansSerial(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 100);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::column_means(f.x));
}

double ks_column(std::span<const double> a, std::span<const double> b) { return ks_2sample(a, b); }

void BM_KsOverColumnsParallel(benchmark::State& state) {
  const auto a = make_fixture(static_cast<std::size_t>(state.range(0)), 50);
  const auto b = make_fixture(static_cast<std::size_t>(state.range(0)) + 1, 50);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::mean_over_columns(a.x, b.x, ks_column));
}

void BM_KsOverColumnsSerial(benchmark::State& state) {
  const auto a = make_fixture(static_cast<std::size_t>(state.range(0)), 50);
  const auto b = make_fixture(static_cast<std::size_t>(state.range(0)) + 1, 50);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::mean_over_columns(a.x, b.x, ks_column));
}

Ruleset bench_ruleset(const Fixture& f) {
  return extract_ruleset(train_tree(f.x, f.y, {6, 5, 52, FeatureSubsample::all}));
}

void BM_ActivationRatesParallel(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 20);
  const auto rs = bench_ruleset(f);
  for (auto _ : state) benchmark::DoNotOptimize(activation_rates(rs, f.x));
}

void BM_ActivationRatesSerial(benchmark::State& state) {
  const auto f = make_fixture(static_cast<std::size_t>(state.range(0)), 20);
  const auto rs = bench_ruleset(f);
  for (auto _ : state) benchmark::DoNotOptimize(serial::activation_rates(rs, f.x));
}

}  // namespace

BENCHMARK(BM_BestSplitParallel)->Arg(500)->Arg(5000);
BENCHMARK(BM_BestSplitSerial)->Arg(500);
BENCHMARK(BM_ColumnMeansParallel)->Arg(10000)->Arg(100000);
BENCHMARK(BM_ColumnMeansSerial)->Arg(10000)->Arg(100000);
BENCHMARK(BM_KsOverColumnsParallel)->Arg(2000);
BENCHMARK(BM_KsOverColumnsSerial)->Arg(2000);
BENCHMARK(BM_ActivationRatesParallel)->Arg(10000);
BENCHMARK(BM_ActivationRatesSerial)->Arg(10000);

BENCHMARK_MAIN();
