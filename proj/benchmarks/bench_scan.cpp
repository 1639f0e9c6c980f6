#include <benchmark/benchmark.h>

#include <random>

#include "sva/corpus.hpp"
#include "sva/generator.hpp"

namespace {

const sva::Lexicon& lexicon() {
  static const sva::Lexicon lex = sva::load_lexicon(sva::default_lexicon_manifest());
  return lex;
}

// Nonce sentences interleaved with filler words, split into documents of ~2k tokens.
std::vector<sva::Document> corpus(std::size_t sentences) {
  std::mt19937_64 rng(1);
  const auto forms = sva::all_forms(lexicon());
  std::vector<sva::Document> docs;
  std::string text;
  std::size_t i = 0;
  for (const auto& t : sva::builtin_templates()) {
    for (const auto& s : sva::generate(t, lexicon(), sentences / 11 + (sentences / 11) % 2, 5).items) {
      for (int k = 0; k < 6; ++k) text += forms[rng() % forms.size()] + " ";
      text += "Filler words here , " + s.sentence() + " ";
      if (++i % 100 == 0) {
        docs.push_back({"doc" + std::to_string(docs.size()), text});
        text.clear();
      }
    }
  }
  if (!text.empty()) docs.push_back({"doc" + std::to_string(docs.size()), text});
  return docs;
}

void BM_Scan(benchmark::State& state) {
  static const auto docs = corpus(20000);
  static const sva::DictionaryIndex idx(lexicon());
  std::size_t tokens = 0;
  for (const auto& d : docs) tokens += sva::tokenize(d.text).size();
  const auto jobs = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sva::scan(docs, sva::builtin_templates(), idx, {}, jobs));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * tokens));
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Tokenize(benchmark::State& state) {
  static const auto docs = corpus(2000);
  std::size_t bytes = 0;
  for (const auto& d : docs) bytes += d.text.size();
  for (auto _ : state)
    for (const auto& d : docs) benchmark::DoNotOptimize(sva::tokenize(d.text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes));
}
BENCHMARK(BM_Tokenize);

void BM_IndexBuild(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sva::DictionaryIndex(lexicon()));
}
BENCHMARK(BM_IndexBuild);

}  // namespace
