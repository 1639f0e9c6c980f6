#include <benchmark/benchmark.h>

#include "sva/eval.hpp"
#include "sva/generator.hpp"

namespace {

const sva::Lexicon& lexicon() {
  static const sva::Lexicon lex = sva::load_lexicon(sva::default_lexicon_manifest());
  return lex;
}

void BM_EvaluateLinearProximity(benchmark::State& state) {
  const sva::Dataset d = sva::generate(sva::builtin_template("F"), lexicon(), 10000, 1);
  sva::LinearProximityScorer lp(lexicon());
  for (auto _ : state) benchmark::DoNotOptimize(sva::evaluate(d, lp, {.keep_items = false}));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_EvaluateLinearProximity)->Unit(benchmark::kMillisecond);

void BM_Exp2CoinFlip(benchmark::State& state) {
  const auto& t = sva::builtin_template("C");
  sva::Dataset wiki = sva::generate(t, lexicon(), 500, 1);
  wiki.source = sva::Source::WIKI;
  sva::CoinFlipScorer coin(1);
  for (auto _ : state) benchmark::DoNotOptimize(sva::run_exp2(wiki, t, lexicon(), coin));
}
BENCHMARK(BM_Exp2CoinFlip)->Unit(benchmark::kMillisecond);

}  // namespace
