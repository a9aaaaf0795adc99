// Serial reference versus OpenMP projector kernels on the default phantom grid.

#include <benchmark/benchmark.h>

#include "xdt/phantom.hpp"
#include "xdt/projector.hpp"

namespace {

const xdt::Volume3& volume() {
  static const xdt::Volume3 v = xdt::generate_phantom(xdt::PhantomSpec::defaults()).volume;
  return v;
}

xdt::ViewSet views() {
  xdt::ViewSet v;
  v.angles = {-35, 0, 35};
  return v;
}

void BM_ForwardReference(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(xdt::reference::forward_project(volume(), views()));
}

void BM_ForwardParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(xdt::forward_project(volume(), views()));
}

void BM_BackReference(benchmark::State& state) {
  const auto imgs = xdt::forward_project(volume(), views());
  for (auto _ : state)
    benchmark::DoNotOptimize(xdt::reference::back_project(imgs, views(), volume().geometry()));
}

void BM_BackParallel(benchmark::State& state) {
  const auto imgs = xdt::forward_project(volume(), views());
  for (auto _ : state) benchmark::DoNotOptimize(xdt::back_project(imgs, views(), volume().geometry()));
}

}  // namespace

BENCHMARK(BM_ForwardReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackReference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
