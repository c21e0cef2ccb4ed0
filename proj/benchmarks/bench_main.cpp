#include "portsheaf/interval_sheaf.hpp"
#include "portsheaf/metriplectic.hpp"
#include "portsheaf/ode_behavior.hpp"
#include "portsheaf/port_hamiltonian.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace portsheaf;

void BM_IntegrateMassSpring(benchmark::State& state) {
  const PHSystem sys = mass_spring_system();
  const OdeBehavior b = closed_behavior(sys, 1e-3);
  const double length = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate(b.field, Eigen::Vector2d(1.0, 0.0), 0.0, length, 1e-3, b.labels));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(length * 1e3));
}
BENCHMARK(BM_IntegrateMassSpring)->Arg(1)->Arg(10);

void BM_RestrictGlue(benchmark::State& state) {
  const PHSystem sys = mass_spring_system();
  const OdeBehavior b = closed_behavior(sys, 1e-3);
  const Trajectory e = integrate(b.field, Eigen::Vector2d(1.0, 0.0), 0.0, 10.0, 1e-3, b.labels);
  for (auto _ : state) {
    const Trajectory left = restrict(e, 4.0, 0.0);
    const Trajectory right = restrict(e, 6.0, 4.0);
    benchmark::DoNotOptimize(glue(left, right));
  }
}
BENCHMARK(BM_RestrictGlue);

void BM_PHDiagram(benchmark::State& state) {
  const PHSystem sys = mass_spring_system();
  const auto probes = closed_probes(sys, static_cast<std::size_t>(state.range(0)), 0, 5.0, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(build_ph_diagram(sys, probes, 1e-5));
}
BENCHMARK(BM_PHDiagram)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_MetriplecticDiagram(benchmark::State& state) {
  const MetriplecticSystem sys = rigid_body_system();
  const auto probes = metriplectic_probes(sys, static_cast<std::size_t>(state.range(0)), 0, 5.0, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(build_metriplectic_diagram(sys, probes, 1e-5));
}
BENCHMARK(BM_MetriplecticDiagram)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
