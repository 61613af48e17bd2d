#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "ptsw/cubic_spectral.hpp"
#include "ptsw/ed_solver.hpp"

namespace {

using namespace ptsw;

SystemParams reference(double gamma, double g, int n_max = 7) {
  return SystemParams::from_omega_theta(1.0, std::numbers::pi / 40, gamma, 1.07, g, n_max);
}

void BM_Eigendecompose(benchmark::State& state) {
  const ComplexMatrix h = build_full_hamiltonian(reference(0.004, 0.13, static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(eigendecompose(h));
  state.SetLabel("dim " + std::to_string(h.rows()));
}
BENCHMARK(BM_Eigendecompose)->Arg(3)->Arg(7)->Arg(10);

void BM_EffectiveNumeric(benchmark::State& state) {
  const auto p = reference(0.004, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(effective_matrix_numeric(p, 0));
}
BENCHMARK(BM_EffectiveNumeric);

void BM_Cardano(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<DepressedCubic> cubics;
  for (int i = 0; i < 1024; ++i) cubics.push_back({u(rng), u(rng), 0.0, 1.0});
  std::size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(cardano_roots(cubics[k++ & 1023]));
}
BENCHMARK(BM_Cardano);

void BM_FindEP3(benchmark::State& state) {
  const auto base = reference(0.0, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(find_ep3(base));
}
BENCHMARK(BM_FindEP3);

void BM_PhaseDiagram(benchmark::State& state) {
  const auto base = reference(0.0, 0.0);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(phase_diagram(base, {0.0, 0.3}, {0.0, 0.02}, n, n, EffectiveModel::Approx,
                                           static_cast<unsigned>(state.range(1))));
}
BENCHMARK(BM_PhaseDiagram)->Args({121, 1})->Args({121, 4})->Unit(benchmark::kMillisecond);

void BM_TrackLevels(benchmark::State& state) {
  const auto base = reference(0.004, 0.0);
  std::vector<double> gs;
  for (int i = 0; i <= 100; ++i) gs.push_back(0.004 * i);
  for (auto _ : state) benchmark::DoNotOptimize(track_levels(base, SweepParam::G, gs));
}
BENCHMARK(BM_TrackLevels)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
