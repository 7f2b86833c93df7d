#include <benchmark/benchmark.h>

#include "vpm/casimir.hpp"

namespace {

using namespace vpm;

constexpr double L = 2.0 * kPi;

const FourierProfile& reference_profile() {
  static const FourierProfile p = make_fermi_step({2.0, 2.0, 16.0, L});
  return p;
}

void BM_CouplingMatrices(benchmark::State& state) {
  const auto b = build_basis(Frequency::imaginary(0.8), 0.2, 0.3, static_cast<int>(state.range(0)), L);
  double z = 1.9;
  for (auto _ : state) {
    auto c = build_coupling_matrices(reference_profile(), b, z);
    benchmark::DoNotOptimize(c.d0.data());
    z += 1e-9;
  }
  state.SetLabel("dim " + std::to_string(b.dim()));
}
BENCHMARK(BM_CouplingMatrices)->Arg(1)->Arg(2)->Arg(4);

void BM_RegularSolution(benchmark::State& state) {
  const auto b = build_basis(Frequency::imaginary(0.8), 0.2, 0.3, static_cast<int>(state.range(0)), L);
  long steps = 0;
  for (auto _ : state) {
    auto r = integrate_regular(Parity::plus, reference_profile(), b, 2.0);
    steps = r.steps;
    benchmark::DoNotOptimize(r.value.data());
  }
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_RegularSolution)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_NodePipeline(benchmark::State& state) {
  const GeometryConfig g{6.0, 0.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(integrand(reference_profile(), 0.8, 0.2, 0.3, static_cast<int>(state.range(0)), g, {}));
}
BENCHMARK(BM_NodePipeline)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_SlabEnergy(benchmark::State& state) {
  const QuadratureSpec q;
  for (auto _ : state) benchmark::DoNotOptimize(slab_energy(4.0, 2.0, 6.0, q, 2, L).value);
}
BENCHMARK(BM_SlabEnergy)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
