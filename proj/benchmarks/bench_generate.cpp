#include <benchmark/benchmark.h>

#include "sva/generator.hpp"

namespace {

const sva::Lexicon& lexicon() {
  static const sva::Lexicon lex = sva::load_lexicon(sva::default_lexicon_manifest());
  return lex;
}

void BM_Generate(benchmark::State& state) {
  const auto& t = sva::builtin_templates()[static_cast<std::size_t>(state.range(0))];
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(sva::generate(t, lexicon(), n, 42));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
  state.SetLabel(t.id);
}
BENCHMARK(BM_Generate)->ArgsProduct({{0, 4, 7}, {1000, 10000}})->Unit(benchmark::kMillisecond);

void BM_GenerateUnique(benchmark::State& state) {
  const auto& t = sva::builtin_template("C");
  for (auto _ : state) benchmark::DoNotOptimize(sva::generate(t, lexicon(), 10000, 42, {.unique = true}));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_GenerateUnique)->Unit(benchmark::kMillisecond);

void BM_AblationSweep(benchmark::State& state) {
  const auto& t = sva::builtin_template("D");
  const sva::Dataset d = sva::generate(t, lexicon(), 500, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sva::ablation_sweep(d, t, lexicon(), 10, 3));
  state.SetItemsProcessed(state.iterations() * 500 * 10 * static_cast<std::int64_t>(t.size() - 1));
}
BENCHMARK(BM_AblationSweep)->Unit(benchmark::kMillisecond);

}  // namespace
