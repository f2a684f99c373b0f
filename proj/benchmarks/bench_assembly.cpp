#include <benchmark/benchmark.h>

#include "casimir/bem_operator.hpp"
#include "casimir/quadrature.hpp"

namespace {

casimir::Assembly pair(int subdiv) {
  const casimir::SurfaceMesh s = casimir::make_icosphere(1.0, subdiv);
  casimir::RigidTransform shift;
  shift.translation = casimir::Vec3(4, 0, 0);
  return casimir::Assembly({s, casimir::transform(s, shift)});
}

void BM_Assemble(benchmark::State& state) {
  const casimir::EdgeBasis basis(pair(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(casimir::assemble(basis, 1.0));
  state.counters["unknowns"] = basis.size();
}
BENCHMARK(BM_Assemble)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_AssembleWithDerivative(benchmark::State& state) {
  const casimir::EdgeBasis basis(pair(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(casimir::assemble_with_derivative(basis, 1.0));
}
BENCHMARK(BM_AssembleWithDerivative)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);

void BM_SingularRule(benchmark::State& state) {
  casimir::QuadratureConfig config;
  config.singular_order = static_cast<int>(state.range(0));
  const std::array<casimir::Vec3, 3> t{casimir::Vec3(0, 0, 0), casimir::Vec3(1, 0, 0), casimir::Vec3(0, 1, 0)};
  auto kernel = [](const casimir::Vec3& x, const casimir::Vec3& y) { return 1.0 / (x - y).norm(); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        casimir::integrate_pair({0, 1, 2}, t, {0, 1, 2}, t, kernel, casimir::PairClass::coincident, config));
  }
}
BENCHMARK(BM_SingularRule)->Arg(4)->Arg(8)->Arg(12);

}  // namespace
