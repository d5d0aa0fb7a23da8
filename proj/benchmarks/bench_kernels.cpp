#include <benchmark/benchmark.h>

#include <vector>

#include "spinregen/ensemble.hpp"
#include "spinregen/gain_oracle.hpp"
#include "spinregen/protocol.hpp"
#include "spinregen/regeneration.hpp"
#include "spinregen/spinwave.hpp"

using namespace spinregen;

namespace {

std::vector<Atom> imprinted(std::size_t n, const Experiment& exp) {
  EnsembleConfig cfg = exp.ensemble;
  cfg.n_atoms = n;
  auto atoms = sample_ensemble(cfg);
  imprint_write(atoms, exp.wave_vectors(), exp.read_mode(), exp.memory.write_efficiency);
  return atoms;
}

void BM_AdvanceBallistic(benchmark::State& state) {
  const Experiment exp = reference_experiment();
  auto atoms = imprinted(state.range(0), exp);
  for (auto _ : state) {
    benchmark::DoNotOptimize(advance_ballistic(atoms, exp.dt, exp.ensemble, 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AdvanceBallistic)->Arg(20000)->Arg(200000);

void BM_GainTick(benchmark::State& state) {
  const Experiment exp = reference_experiment();
  auto atoms = imprinted(state.range(0), exp);
  GainModel gain = exp.gain;
  gain.assist_on = true;
  gain.kappa = 1e5;  // keeps the store bounded over many iterations
  SpinWaveState wave;
  GainScratch scratch;
  const WaveVectors v = exp.wave_vectors();
  for (auto _ : state) {
    apply_gain_tick(atoms, wave, gain, v, exp.dt, &scratch);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GainTick)->Arg(20000)->Arg(200000);

void BM_RetrievalEfficiency(benchmark::State& state) {
  const Experiment exp = reference_experiment();
  const auto atoms = imprinted(state.range(0), exp);
  const WaveVectors v = exp.wave_vectors();
  const BeamGeometry mode = exp.read_mode();
  for (auto _ : state) benchmark::DoNotOptimize(retrieval_efficiency(atoms, v, mode));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RetrievalEfficiency)->Arg(200000);

void BM_GainOracle(benchmark::State& state) {
  const int n0 = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(converged_gain_oracle(n0, 2.0).mean);
}
BENCHMARK(BM_GainOracle)->Arg(0)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Fig2NoAssist(benchmark::State& state) {
  Experiment exp = reference_experiment();
  exp.ensemble.n_atoms = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sequence(fig2_sequence(false, true, exp.dt), exp).reads[0].efficiency);
  }
}
BENCHMARK(BM_Fig2NoAssist)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
