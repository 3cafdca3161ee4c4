// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels on the cube benchmark mesh.
#include "rdflux/benchmark.hpp"
#include "rdflux/equilibration.hpp"
#include "rdflux/fem.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

namespace {

using rdflux::Execution;

struct Fixture {
  rdflux::Mesh mesh;
  rdflux::ProblemData data;
  rdflux::FemSolution uh;
  rdflux::EquilibratedFluxes eq;
};

const Fixture& fixture(int M) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[M];
  if (!slot) {
    slot = std::make_unique<Fixture>(Fixture{rdflux::benchmark_cube_mesh(3, M, 100.0, 1e6), {}, {}, {}});
    slot->data.source = [](const rdflux::Point&) { return 1e4; };
    slot->data.data_degree = 2;
    slot->uh = rdflux::solve_fem(slot->mesh, slot->data);
    slot->eq = rdflux::equilibrate(slot->mesh, slot->uh, slot->data);
  }
  return *slot;
}

Execution mode(const benchmark::State& state) { return state.range(1) ? Execution::Parallel : Execution::Sequential; }

void BM_Assemble(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rdflux::assemble(f.mesh, f.data, mode(state)));
}

void BM_Equilibrate(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rdflux::equilibrate(f.mesh, f.uh, f.data, mode(state)));
}

void BM_Estimate(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  rdflux::EstimateOptions opts;
  opts.exec = mode(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(rdflux::estimate(f.mesh, f.uh, f.data, f.eq, rdflux::Strategy::Both, opts));
}

void args(benchmark::internal::Benchmark* b) {
  b->ArgNames({"M", "parallel"})->ArgsProduct({{4, 8}, {0, 1}})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_Assemble)->Apply(args);
BENCHMARK(BM_Equilibrate)->Apply(args);
BENCHMARK(BM_Estimate)->Apply(args);

}  // namespace

BENCHMARK_MAIN();
