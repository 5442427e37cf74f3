#include <benchmark/benchmark.h>

#include <memory>

#include "flaghp/atomizer.hpp"
#include "flaghp/config.hpp"
#include "flaghp/filter_bank.hpp"
#include "flaghp/flag_transform.hpp"
#include "flaghp/maximal.hpp"
#include "flaghp/validation.hpp"

using namespace flaghp;

namespace {

struct Setup {
  RunConfig cfg;
  std::shared_ptr<const FilterBank> bank;
  SampledFunction f;

  explicit Setup(int L, std::size_t entry = 4) : cfg(default_config()) {
    cfg.L = L;
    bank = std::make_shared<const FilterBank>(
        build_filter_bank(config_grid(cfg), config_j_range(cfg), config_k_range(cfg), cfg.profile));
    f = synthesize(corpus_entry(cfg, entry), config_grid(cfg));
  }
};

void BM_BuildFilterBank(benchmark::State& state) {
  const Grid g = make_grid(1, 1, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_filter_bank(g, {1, 3}, {1, 3}, Profile::meyer_smooth));
}

void BM_Analyze(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze(s.f, s.bank));
}

void BM_Reconstruct(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const FlagCoefficients c = analyze(s.f, s.bank);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(c));
}

void BM_StrongMaximal(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const MaximalConfig mc{};
  for (auto _ : state) benchmark::DoNotOptimize(strong_maximal(s.f, mc));
}

void BM_MaximalSquareFunction(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const FlagCoefficients c = analyze(s.f, s.bank);
  for (auto _ : state) benchmark::DoNotOptimize(maximal_square_function(c));
}

void BM_Decompose(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(s.f, s.bank, 0.8, atomizer_config(s.cfg)));
}

void BM_Calibrate(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const auto plan =
      std::make_shared<const DecompositionPlan>(plan_decomposition(s.f, s.bank, atomizer_config(s.cfg)));
  for (auto _ : state) benchmark::DoNotOptimize(calibrate(plan, 0.8));
}

void BM_LiftParticle(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  const AtomicDecomposition d = decompose(s.f, s.bank, 0.8, atomizer_config(s.cfg));
  const auto picks = sample_rectangles(d, 2);
  if (picks.empty()) {
    state.SkipWithError("no rectangles");
    return;
  }
  const auto& [atom, rect] = picks.front();
  for (auto _ : state)
    benchmark::DoNotOptimize(lift_particle(d.plan->coefficients, rect, d.atoms[atom].normalization));
}

}  // namespace

BENCHMARK(BM_BuildFilterBank)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Analyze)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Reconstruct)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StrongMaximal)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaximalSquareFunction)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Decompose)->DenseRange(6, 8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Calibrate)->DenseRange(6, 7)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LiftParticle)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
