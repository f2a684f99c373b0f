#include <benchmark/benchmark.h>

#include "casimir/bem_operator.hpp"
#include "casimir/spectral_oracle.hpp"

namespace {

casimir::BlockOperator operator_for(int subdiv) {
  const casimir::SurfaceMesh s = casimir::make_icosphere(1.0, subdiv);
  casimir::RigidTransform shift;
  shift.translation = casimir::Vec3(4, 0, 0);
  const casimir::EdgeBasis basis(casimir::Assembly({s, casimir::transform(s, shift)}));
  return casimir::assemble(basis, 1.0);
}

void BM_XiFull(benchmark::State& state) {
  const casimir::BlockOperator z = operator_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(casimir::xi(z));
  state.counters["unknowns"] = z.size();
}
BENCHMARK(BM_XiFull)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_XiSchur(benchmark::State& state) {
  const casimir::BlockOperator z = operator_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(casimir::two_body_schur_xi(z));
}
BENCHMARK(BM_XiSchur)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_OracleXi(benchmark::State& state) {
  const std::vector<casimir::Sphere> spheres{{casimir::Vec3::Zero(), 1.0}, {casimir::Vec3(4, 0, 0), 1.0}};
  const int lmax = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(casimir::oracle_xi(spheres, 1.0, lmax));
}
BENCHMARK(BM_OracleXi)->Arg(10)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace
