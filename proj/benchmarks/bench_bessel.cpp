#include <benchmark/benchmark.h>

#include "casimir/bessel.hpp"

namespace {

void BM_BesselAll(benchmark::State& state) {
  const int lmax = static_cast<int>(state.range(0));
  double x = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(casimir::bessel_ik_all(lmax, x));
    x = x < 50.0 ? x * 1.1 : 0.5;
  }
}
BENCHMARK(BM_BesselAll)->Arg(10)->Arg(30)->Arg(60);

void BM_LogBessel(benchmark::State& state) {
  std::vector<double> li, lk;
  for (auto _ : state) {
    casimir::log_bessel_ik(static_cast<int>(state.range(0)), 2.0, li, lk);
    benchmark::DoNotOptimize(li.data());
  }
}
BENCHMARK(BM_LogBessel)->Arg(60)->Arg(200);

}  // namespace
