#include <benchmark/benchmark.h>

#include "flab/channels.hpp"
#include "flab/contraction.hpp"
#include "flab/diffusion.hpp"
#include "flab/random.hpp"

using namespace flab;

static void BM_PermutationAverage(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mode = state.range(1) ? channels::PermutationAverage::Mode::symmetric_projector
                                   : channels::PermutationAverage::Mode::exact_sum;
  const channels::PermutationAverage p({2, n}, mode);
  auto eng = rng::make_engine(1, 0);
  const CMat a = rng::ginibre(1 << n, 1 << n, eng);
  for (auto _ : state) benchmark::DoNotOptimize(p.apply(a));
}
BENCHMARK(BM_PermutationAverage)->ArgsProduct({{3, 4, 5, 6}, {0, 1}});

static void BM_DepolarizingProduct(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto ch = channels::product_channel(channels::DepolarizingChannel(2.0, 2), n);
  auto eng = rng::make_engine(2, 0);
  const CMat a = rng::ginibre(1 << n, 1 << n, eng);
  for (auto _ : state) benchmark::DoNotOptimize(ch.apply(a));
}
BENCHMARK(BM_DepolarizingProduct)->DenseRange(2, 8, 2);

static void BM_ContractionSpectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ops::QuditSystem s(2, n);
  const auto site = ops::DensityMatrix::basis_state(2, 0);
  const auto ch = channels::homogeneous_channel(channels::DepolarizingChannel(2.0, 2), n);
  const auto in = geometry::sector_space(s, site, 1, 2);
  const auto out = geometry::sector_space(s, *ops::as_product_power(ch.apply(ops::product_power(site, n))), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(geometry::contraction_spectrum(ch, out, in));
}
BENCHMARK(BM_ContractionSpectrum)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

static void BM_TwoWalkerSemigroup(benchmark::State& state) {
  const channels::SwapDiffusion sd(static_cast<int>(state.range(0)), 0.1, 0.2);
  for (auto _ : state) benchmark::DoNotOptimize(sd.sector_semigroup(2));
}
BENCHMARK(BM_TwoWalkerSemigroup)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
