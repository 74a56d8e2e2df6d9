#include <benchmark/benchmark.h>

#include "nkflow/heisenberg.hpp"

using namespace nkflow;

namespace {

const HeisenbergParams kParams{2.0, 1.0, 3.0 / 16.0};

void BM_WedgeSigmaSigma(benchmark::State& state) {
  const SU3Structure s6 = heisenberg_structure(kParams, 1.1);
  for (auto _ : state) {
    Form w = wedge(s6.sigma, s6.sigma);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_WedgeSigmaSigma);

void BM_ExtDPsiMinus(benchmark::State& state) {
  const SU3Structure s6 = heisenberg_structure(kParams, 1.1);
  for (auto _ : state) {
    Form d = ext_d(s6.psi_minus, s6.frame);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_ExtDPsiMinus);

void BM_HodgeGrade3(benchmark::State& state) {
  const SU3Structure s6 = heisenberg_structure(kParams, 1.1);
  const Form vol = volume_form(s6);
  for (auto _ : state) {
    Form h = hodge(s6.psi_plus, s6.g, vol);
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_HodgeGrade3);

void BM_LaplacianOfS(benchmark::State& state) {
  const SU3Structure s6 = heisenberg_structure(kParams, 1.1);
  for (auto _ : state) {
    Jet lap = laplacian_of_s(s6);
    benchmark::DoNotOptimize(lap);
  }
}
BENCHMARK(BM_LaplacianOfS);

void BM_EvolutionRhs(benchmark::State& state) {
  const EvolutionState st = heisenberg_initial_state(kParams);
  for (auto _ : state) {
    StateDerivative d = evolution_rhs(st);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_EvolutionRhs);

void BM_Rk4Trajectory(benchmark::State& state) {
  const EvolutionState st0 = heisenberg_initial_state(kParams);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Trajectory t = integrate(st0, 0.3 / steps, steps, IntegratorMethod::rk4);
    benchmark::DoNotOptimize(t);
  }
  state.SetComplexityN(steps);
}
BENCHMARK(BM_Rk4Trajectory)->Arg(30)->Arg(300)->Complexity(benchmark::oN);

void BM_AssembleAndResidual(benchmark::State& state) {
  const EvolutionState st = heisenberg_initial_state(kParams);
  for (auto _ : state) {
    auto r = nk_residual(assemble_state_structure(st));
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_AssembleAndResidual);

}  // namespace

BENCHMARK_MAIN();
