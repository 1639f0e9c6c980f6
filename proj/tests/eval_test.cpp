#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "sva/eval.hpp"
#include "sva/generator.hpp"

using namespace sva;

namespace {

const Lexicon& lexicon() {
  static const Lexicon lex = sva::testing::bundled_lexicon();
  return lex;
}

Dataset nonce(const std::string& id, std::size_t n = 200, std::uint64_t seed = 1) {
  return generate(builtin_template(id), lexicon(), n, seed);
}

double accuracy(const EvalReport& r) { return r.rows.at(0).accuracy; }

// Scripted scorer: a fixed score pair per request id.
class TableScorer final : public Scorer {
 public:
  std::map<std::string, ScoreResponse> table;
  std::string name() const override { return "table"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override {
    std::vector<ScoreResponse> out;
    for (const auto& r : batch) out.push_back(table.at(r.id));
    return out;
  }
};

// Fails the first `failures` calls with a transport error.
class FlakyScorer final : public Scorer {
 public:
  explicit FlakyScorer(int failures) : failures_(failures) {}
  std::string name() const override { return "flaky"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override {
    if (failures_-- > 0) throw ScorerTransportError("connection reset");
    return inner_.score(batch);
  }
  void prepare(const Dataset& d) override { inner_.prepare(d); }

 private:
  int failures_;
  OracleScorer inner_;
};

class VocabScorer final : public Scorer {
 public:
  explicit VocabScorer(std::set<std::string> vocab) : vocab_(std::move(vocab)) {}
  std::string name() const override { return "vocab"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override { return inner_.score(batch); }
  std::optional<std::vector<bool>> contains(std::span<const std::string> words) override {
    std::vector<bool> out;
    for (const auto& w : words) out.push_back(vocab_.count(w) > 0);
    return out;
  }

 private:
  std::set<std::string> vocab_;
  UniformScorer inner_;
};

}  // namespace

TEST(Requests, TargetIsMaskedAndCorrectComesFirst) {
  const Dataset d = nonce("A", 2);
  const Stimulus& s = d.items[1];
  const ScoreRequest r = make_request(s, "7");
  EXPECT_EQ(r.tokens[r.mask_index], kMaskToken);
  EXPECT_EQ(r.mask_index, s.target_index);
  EXPECT_EQ(r.candidates[0], s.correct_form);
  EXPECT_EQ(r.candidates[1], s.incorrect_form);
  for (const auto& tok : r.tokens) EXPECT_NE(tok, s.correct_form);
  EXPECT_EQ(request_from_json(to_json(r)), r);
}

TEST(Evaluate, OracleIsPerfect) {
  OracleScorer oracle;
  for (const auto& t : builtin_templates()) EXPECT_EQ(accuracy(evaluate(nonce(t.id), oracle)), 1.0) << t.id;
}

TEST(Evaluate, TiesAreWrong) {
  UniformScorer uniform;
  const EvalReport r = evaluate(nonce("C"), uniform);
  EXPECT_EQ(accuracy(r), 0.0);
  EXPECT_EQ(r.rows[0].n_items, 200u);
  EXPECT_EQ(r.rows[0].skipped, 0u);
}

TEST(Evaluate, LinearProximityDichotomy) {
  LinearProximityScorer lp(lexicon());
  for (const auto& t : builtin_templates()) {
    const double expected = t.has_attractor() ? 0.0 : 1.0;
    EXPECT_EQ(accuracy(evaluate(nonce(t.id, 1000), lp)), expected) << t.id;
  }
}

TEST(Evaluate, LinearProximityFallsBackToTies) {
  LinearProximityScorer lp(lexicon());
  ScoreRequest r{"x", {"[MASK]", "quickly"}, 0, {"laughs", "laugh"}};
  EXPECT_EQ(lp.score({&r, 1})[0].scores[0], lp.score({&r, 1})[0].scores[1]);
}

TEST(Evaluate, CoinFlipNearChance) {
  const Dataset d = nonce("B", 10000);
  for (std::uint64_t seed : {1, 2}) {
    CoinFlipScorer coin(seed);
    const double acc = accuracy(evaluate(d, coin));
    EXPECT_GE(acc, 0.48);
    EXPECT_LE(acc, 0.52);
  }
}

TEST(Evaluate, CoinFlipIgnoresCandidateOrder) {
  CoinFlipScorer coin(3);
  ScoreRequest a{"1", {"the", "boy", "[MASK]"}, 2, {"laughs", "laugh"}};
  ScoreRequest b = a;
  std::swap(b.candidates[0], b.candidates[1]);
  const auto ra = coin.score({&a, 1})[0];
  const auto rb = coin.score({&b, 1})[0];
  EXPECT_EQ(ra.scores[0], rb.scores[1]);
  EXPECT_EQ(ra.scores[1], rb.scores[0]);
}

TEST(Evaluate, ShuffleInvariant) {
  Dataset d = nonce("D", 400);
  CoinFlipScorer coin(5);
  const EvalReport before = evaluate(d, coin);
  std::mt19937_64 rng(1);
  std::shuffle(d.items.begin(), d.items.end(), rng);
  const EvalReport after = evaluate(d, coin);
  EXPECT_EQ(before.rows[0].n_correct, after.rows[0].n_correct);
  EXPECT_EQ(before.rows[0].singular, after.rows[0].singular);
  EXPECT_EQ(before.rows[0].plural, after.rows[0].plural);
}

TEST(Evaluate, AccuracyDecomposesByCueNumber) {
  CoinFlipScorer coin(9);
  for (const auto& t : builtin_templates()) {
    const EvalRow row = evaluate(nonce(t.id, 300, 4), coin).rows[0];
    EXPECT_EQ(row.singular.n + row.plural.n, row.n_items);
    EXPECT_EQ(row.singular.correct + row.plural.correct, row.n_correct);
    const double weighted = (row.singular.accuracy() * static_cast<double>(row.singular.n) +
                             row.plural.accuracy() * static_cast<double>(row.plural.n)) /
                            static_cast<double>(row.n_items);
    EXPECT_NEAR(weighted, row.accuracy, 1e-12);
  }
}

TEST(Evaluate, MatchesHandRolledLoop) {
  const Dataset d = nonce("H", 20, 77);
  std::vector<std::unique_ptr<Scorer>> scorers;
  scorers.push_back(std::make_unique<CoinFlipScorer>(1));
  scorers.push_back(std::make_unique<LinearProximityScorer>(lexicon()));
  scorers.push_back(std::make_unique<UniformScorer>());
  for (auto& s : scorers) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.items.size(); ++i) {
      const ScoreRequest req = make_request(d.items[i], std::to_string(i));
      const auto resp = s->score({&req, 1})[0];
      correct += resp.scores[0] > resp.scores[1];
    }
    const EvalRow row = evaluate(d, *s, {.batch_size = 3}).rows[0];
    EXPECT_EQ(row.n_correct, correct) << s->name();
    EXPECT_EQ(row.n_items, 20u);
  }
}

TEST(Evaluate, SkipsAreCountedNotScored) {
  const Dataset d = nonce("A", 4);
  TableScorer table;
  table.table["0"] = {"0", {1.0, 0.0}, std::nullopt};
  table.table["1"] = {"1", {0.0, 0.0}, std::string("candidate split into subwords")};
  table.table["2"] = {"2", {NAN, 0.0}, std::nullopt};
  table.table["3"] = {"3", {0.0, 1.0}, std::nullopt};
  const EvalRow row = evaluate(d, table).rows[0];
  EXPECT_EQ(row.n_items, 2u);
  EXPECT_EQ(row.skipped, 2u);
  EXPECT_EQ(row.n_correct, 1u);
  EXPECT_EQ(row.accuracy, 0.5);
  EXPECT_EQ(row.items[1].note, "candidate split into subwords");
  EXPECT_TRUE(row.items[2].skipped);
}

TEST(Evaluate, OutOfVocabularyItemsAreSkipped) {
  Dataset d = nonce("A", 10);
  std::set<std::string> vocab;
  for (std::size_t i = 0; i < 6; ++i) vocab.insert({d.items[i].correct_form, d.items[i].incorrect_form});
  VocabScorer scorer(vocab);
  const EvalRow row = evaluate(d, scorer).rows[0];
  EXPECT_EQ(row.n_items + row.skipped, 10u);
  EXPECT_GE(row.n_items, 6u);
}

TEST(Evaluate, TransportErrorsAreRetried) {
  const Dataset d = nonce("A", 8);
  FlakyScorer twice(2);
  EXPECT_EQ(accuracy(evaluate(d, twice, {.max_retries = 2})), 1.0);
  FlakyScorer always(100);
  try {
    evaluate(d, always, {.max_retries = 1});
    FAIL() << "expected EvalError";
  } catch (const EvalError& e) {
    EXPECT_NE(std::string(e.what()).find("item 0"), std::string::npos) << e.what();
  }
}

TEST(Evaluate, ParallelBatchesGiveTheSameRow) {
  const Dataset d = nonce("F", 500);
  CoinFlipScorer coin(2);
  EXPECT_EQ(evaluate(d, coin, {.batch_size = 7}), evaluate(d, coin, {.batch_size = 7, .jobs = 4}));
}

TEST(Report, AggregatesUseSampleStddev) {
  EvalReport r;
  for (double acc : {0.5, 0.7, 0.9}) {
    EvalRow row;
    row.template_id = "C";
    row.condition = "replace";
    row.position = 1;
    row.accuracy = acc;
    r.rows.push_back(row);
  }
  r.aggregate();
  ASSERT_EQ(r.aggregates.size(), 1u);
  EXPECT_NEAR(r.aggregates[0].mean, 0.7, 1e-12);
  EXPECT_NEAR(r.aggregates[0].stddev, 0.2, 1e-12);
  EXPECT_EQ(r.aggregates[0].repetitions, 3u);
}

TEST(Report, JsonRoundTripAndCsv) {
  OracleScorer oracle;
  Exp2Options o;
  o.repetitions = 3;
  Dataset wiki = nonce("C", 20);
  wiki.source = Source::WIKI;
  const EvalReport r = run_exp2(wiki, builtin_template("C"), lexicon(), oracle, o);
  EXPECT_EQ(report_from_json(nlohmann::json::parse(to_json(r).dump())), r);

  std::ostringstream csv;
  write_csv(csv, r);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "template,source,condition,position,repetition,n,correct,skipped,accuracy");
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, "C,WIKI,baseline,,0,20,20,0,1.000000");

  std::ostringstream tsv, outcomes;
  write_tsv(tsv, r);
  write_outcomes(outcomes, r);
  EXPECT_FALSE(tsv.str().empty());
  const std::string outcome_lines = outcomes.str();
  EXPECT_EQ(std::count(outcome_lines.begin(), outcome_lines.end(), '\n'), 20 * (1 + 6 * 3));
}

TEST(Exp1, OracleFillsEveryCell) {
  OracleScorer oracle;
  Exp1Inputs in;
  for (const auto& id : {"A", "C"}) {
    Dataset w = nonce(id, 10, 2);
    w.source = Source::WIKI;
    Dataset m = nonce(id, 10, 3);
    m.source = Source::ML;
    in[id] = {{Source::NONCE, nonce(id, 10)}, {Source::WIKI, w}, {Source::ML, m}};
  }
  const EvalReport r = run_exp1(in, oracle);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const auto& row : r.rows) EXPECT_EQ(row.accuracy, 1.0);
}

TEST(Exp1, MissingSourcesAreAbsent) {
  LinearProximityScorer lp(lexicon());
  Exp1Inputs in;
  in["C"] = {{Source::NONCE, nonce("C")}};
  in["A"] = {{Source::NONCE, nonce("A")}};
  const EvalReport r = run_exp1(in, lp);
  std::size_t absent = 0;
  for (const auto& row : r.rows) {
    if (row.absent) {
      ++absent;
      continue;
    }
    EXPECT_EQ(row.accuracy, row.template_id == "A" ? 1.0 : 0.0);
  }
  EXPECT_EQ(absent, 4u);
  std::ostringstream csv;
  write_csv(csv, r);
  EXPECT_NE(csv.str().find("A,WIKI,exp1,,0,0,0,0,NA"), std::string::npos) << csv.str();
}

TEST(Exp2, OracleIsFlat) {
  OracleScorer oracle;
  Dataset wiki = nonce("D", 30);
  wiki.source = Source::WIKI;
  const EvalReport r = run_exp2(wiki, builtin_template("D"), lexicon(), oracle, {.repetitions = 4});
  for (const auto& a : r.aggregates) {
    EXPECT_EQ(a.mean, 1.0);
    EXPECT_EQ(a.stddev, 0.0);
  }
}

TEST(Exp2, RowsPerPositionAndRepetition) {
  CoinFlipScorer coin(1);
  Dataset wiki = nonce("C", 30);
  wiki.source = Source::WIKI;
  const Dataset ref = nonce("C", 30, 9);
  const EvalReport r = run_exp2(wiki, builtin_template("C"), lexicon(), coin, {.repetitions = 10}, &ref);
  std::size_t replace_cells = 0;
  for (const auto& a : r.aggregates) {
    if (a.condition != "replace") {
      EXPECT_EQ(a.repetitions, 1u);
      continue;
    }
    ++replace_cells;
    EXPECT_EQ(a.repetitions, 10u);
  }
  EXPECT_EQ(replace_cells, 6u);
  EXPECT_EQ(r.aggregates.size(), 8u);
}

TEST(Exp2, LinearProximityIgnoresTheCue) {
  LinearProximityScorer lp(lexicon());
  Dataset wiki = nonce("C", 100);
  wiki.source = Source::WIKI;
  const EvalReport r = run_exp2(wiki, builtin_template("C"), lexicon(), lp, {.repetitions = 3, .seed = 4});
  for (const auto& a : r.aggregates)
    if (a.position == 1u) {
      ASSERT_TRUE(a.incongruent_mean.has_value());
      EXPECT_EQ(*a.incongruent_mean, 0.0);
    }
}

TEST(ImportMl, SingleDifferingToken) {
  std::istringstream in("# label good bad\nA\tthe boy laughs\tthe boy laugh\n\nC\tthe plate near the glasses breaks\tthe plate near the glasses break\n");
  const auto sets = import_ml(in, builtin_templates(), &lexicon());
  ASSERT_EQ(sets.size(), 2u);
  const Stimulus& a = sets.at("A").items.at(0);
  EXPECT_EQ(a.target_index, 2u);
  EXPECT_EQ(a.cue_index, 1u);
  EXPECT_EQ(a.correct_form, "laughs");
  EXPECT_EQ(a.incorrect_form, "laugh");
  EXPECT_EQ(a.cue_number, Number::Singular);
  EXPECT_EQ(a.source, Source::ML);
  const Stimulus& c = sets.at("C").items.at(0);
  EXPECT_EQ(c.attractor_number, Number::Plural);
  OracleScorer oracle;
  EXPECT_EQ(accuracy(evaluate(sets.at("C"), oracle)), 1.0);
}

TEST(ImportMl, Errors) {
  auto fails = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      import_ml(in, builtin_templates(), nullptr, "ml.txt");
    } catch (const EvalError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
      return;
    }
    ADD_FAILURE() << "no error for: " << text;
  };
  fails("A\tthe boy laughs\tthe boy laughs\n", "identical");
  fails("A\tthe boy laughs\tthe boys laugh\n", "2 positions");
  fails("A\tthe boy laughs\tthe boy laugh\nQ\tthe boy laughs\tthe boy laugh\n", "ml.txt:2");
}
