// Serial reference vs OpenMP kernels. Arguments of the parallel variants are
// worker counts (0: OpenMP default).

#include <benchmark/benchmark.h>

#include "lab/arith.hpp"
#include "lab/flows.hpp"
#include "lab/fractal.hpp"
#include "lab/lattice.hpp"
#include "lab/maps.hpp"
#include "lab/turing.hpp"

namespace {

using namespace lab;

fractal::RenderJob mandelbrot_job() {
  return fractal::MandelbrotJob{{{-0.5, 0.0}, 3.0, 512, 384}, 500};
}

void BM_MandelbrotSerial(benchmark::State& state) {
  const auto job = mandelbrot_job();
  for (auto _ : state) benchmark::DoNotOptimize(fractal::serial::render(job));
  state.SetItemsProcessed(state.iterations() * 512 * 384);
}
BENCHMARK(BM_MandelbrotSerial)->Unit(benchmark::kMillisecond);

void BM_MandelbrotTiles(benchmark::State& state) {
  const auto job = mandelbrot_job();
  for (auto _ : state) benchmark::DoNotOptimize(fractal::render_tiles(job, 64, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * 512 * 384);
}
BENCHMARK(BM_MandelbrotTiles)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_ProductSeriesSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(arith::serial::product_series({5}, 100000));
}
BENCHMARK(BM_ProductSeriesSerial)->Unit(benchmark::kMillisecond);

void BM_ProductSeries(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(arith::product_series({5}, 100000, arith::Count::Affine, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_ProductSeries)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_TuringStepSerial(benchmark::State& state) {
  turing::TuringParams p;
  p.nx = p.ny = 256;
  const auto [u, v] = turing::initial_state(p, 1, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(turing::serial::turing_step(u, v, p));
}
BENCHMARK(BM_TuringStepSerial)->Unit(benchmark::kMicrosecond);

void BM_TuringStep(benchmark::State& state) {
  turing::TuringParams p;
  p.nx = p.ny = 256;
  const auto [u, v] = turing::initial_state(p, 1, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(turing::turing_step(u, v, p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_TuringStep)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);

void BM_BifurcationSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(maps::serial::bifurcation_diagram(2.5, 4.0, 1000, 1000, 200));
}
BENCHMARK(BM_BifurcationSerial)->Unit(benchmark::kMillisecond);

void BM_Bifurcation(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        maps::bifurcation_diagram(2.5, 4.0, 1000, 1000, 200, 0.5, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(BM_Bifurcation)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_KdvStepSerial(benchmark::State& state) {
  const auto p = lattice::KdvParams::make(0.022, 2048, 1e-7);
  const auto v = lattice::cosine_profile(2048);
  const auto prev = lattice::kdv_euler_start(v, p);
  for (auto _ : state) benchmark::DoNotOptimize(lattice::serial::kdv_step(prev, v, p));
}
BENCHMARK(BM_KdvStepSerial)->Unit(benchmark::kMicrosecond);

void BM_KdvStep(benchmark::State& state) {
  const auto p = lattice::KdvParams::make(0.022, 2048, 1e-7);
  const auto v = lattice::cosine_profile(2048);
  const auto prev = lattice::kdv_euler_start(v, p);
  for (auto _ : state) benchmark::DoNotOptimize(lattice::kdv_step(prev, v, p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_KdvStep)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);

void BM_HHSectionSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(flows::serial::hh_section(1.0 / 12.0, 16, 50, 0.01, flows::SeedRule::Grid));
  }
}
BENCHMARK(BM_HHSectionSerial)->Unit(benchmark::kMillisecond);

void BM_HHSection(benchmark::State& state) {
  flows::SectionOptions opts;
  opts.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(flows::hh_section(1.0 / 12.0, 16, 50, 0.01, flows::SeedRule::Grid, opts));
  }
}
BENCHMARK(BM_HHSection)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
