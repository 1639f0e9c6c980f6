#include "sva/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "sva/dictionary.hpp"
#include "sva/generator.hpp"
#include "sva/util.hpp"

namespace sva {
namespace {

using CellKey = std::tuple<std::string, Source, std::string, std::optional<std::size_t>>;

CellKey key_of(const EvalRow& r) { return {r.template_id, r.source, r.condition, r.position}; }

// Items whose candidate forms the scorer's vocabulary does not contain.
std::vector<bool> out_of_vocab(const Dataset& d, Scorer& scorer) {
  std::set<std::string> forms;
  for (const auto& s : d.items) forms.insert({s.correct_form, s.incorrect_form});
  const std::vector<std::string> words(forms.begin(), forms.end());
  const auto known = scorer.contains(words);
  std::vector<bool> oov(d.items.size(), false);
  if (!known) return oov;
  if (known->size() != words.size()) throw EvalError("scorer vocabulary reply has the wrong size");
  std::set<std::string> missing;
  for (std::size_t i = 0; i < words.size(); ++i)
    if (!(*known)[i]) missing.insert(words[i]);
  for (std::size_t i = 0; i < d.items.size(); ++i)
    oov[i] = missing.count(d.items[i].correct_form) || missing.count(d.items[i].incorrect_form);
  return oov;
}

std::vector<ScoreResponse> score_with_retry(Scorer& scorer, std::span<const ScoreRequest> batch,
                                            unsigned max_retries) {
  for (unsigned attempt = 0;; ++attempt) {
    try {
      return scorer.score(batch);
    } catch (const ScorerTransportError& e) {
      if (attempt >= max_retries)
        throw EvalError("scorer " + scorer.name() + " failed on item " + batch.front().id +
                        " after " + std::to_string(attempt + 1) + " attempts: " + e.what());
    }
  }
}

void tally(Tally& t, bool correct) {
  ++t.n;
  t.correct += correct;
}

}  // namespace

void EvalReport::append(EvalReport other) {
  std::move(other.rows.begin(), other.rows.end(), std::back_inserter(rows));
  aggregate();
}

void EvalReport::aggregate() {
  aggregates.clear();
  std::vector<CellKey> order;
  std::map<CellKey, std::vector<const EvalRow*>> cells;
  for (const auto& r : rows) {
    if (r.absent) continue;
    auto k = key_of(r);
    if (!cells.count(k)) order.push_back(k);
    cells[k].push_back(&r);
  }
  for (const auto& k : order) {
    const auto& rs = cells[k];
    Aggregate a;
    std::tie(a.template_id, a.source, a.condition, a.position) = k;
    a.repetitions = rs.size();
    double sum = 0;
    for (const auto* r : rs) sum += r->accuracy;
    a.mean = sum / static_cast<double>(rs.size());
    if (rs.size() > 1) {
      double ss = 0;
      for (const auto* r : rs) ss += (r->accuracy - a.mean) * (r->accuracy - a.mean);
      a.stddev = std::sqrt(ss / static_cast<double>(rs.size() - 1));
    }
    std::vector<double> inc;
    for (const auto* r : rs)
      if (r->attractor_incongruent.n > 0) inc.push_back(r->attractor_incongruent.accuracy());
    if (!inc.empty())
      a.incongruent_mean = std::accumulate(inc.begin(), inc.end(), 0.0) / static_cast<double>(inc.size());
    aggregates.push_back(std::move(a));
  }
}

EvalReport evaluate(const Dataset& d, Scorer& scorer, const EvalOptions& options) {
  scorer.prepare(d);
  const std::vector<bool> oov = out_of_vocab(d, scorer);

  std::vector<ItemOutcome> outcomes(d.items.size());
  std::vector<ScoreRequest> requests;
  std::vector<std::size_t> request_item;
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    outcomes[i].index = i;
    if (oov[i]) {
      outcomes[i].skipped = true;
      outcomes[i].note = "out of scorer vocabulary";
      continue;
    }
    requests.push_back(make_request(d.items[i], std::to_string(i)));
    request_item.push_back(i);
  }

  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  const std::size_t n_batches = (requests.size() + batch - 1) / batch;
  const unsigned workers = std::max(1u, std::min(options.jobs, scorer.max_concurrency()));
  parallel_for(n_batches, workers, [&](std::size_t b) {
    const std::size_t lo = b * batch;
    const std::size_t hi = std::min(requests.size(), lo + batch);
    const std::span<const ScoreRequest> part(requests.data() + lo, hi - lo);
    const auto responses = score_with_retry(scorer, part, options.max_retries);
    if (responses.size() != part.size())
      throw EvalError("scorer " + scorer.name() + " returned a short batch at item " + part.front().id);
    for (std::size_t k = 0; k < part.size(); ++k) {
      ItemOutcome& o = outcomes[request_item[lo + k]];
      const ScoreResponse& r = responses[k];
      if (r.error) {
        o.skipped = true;
        o.note = *r.error;
      } else if (!std::isfinite(r.scores[0]) || !std::isfinite(r.scores[1])) {
        o.skipped = true;
        o.note = "non-finite score";
      } else {
        o.scores = r.scores;
        o.correct = r.scores[0] > r.scores[1];
      }
    }
  });

  EvalRow row;
  row.template_id = d.template_id;
  row.source = d.source;
  row.condition = options.condition;
  row.position = options.position;
  row.repetition = options.repetition;
  for (std::size_t i = 0; i < d.items.size(); ++i) {
    const ItemOutcome& o = outcomes[i];
    if (o.skipped) {
      ++row.skipped;
      continue;
    }
    const Stimulus& s = d.items[i];
    ++row.n_items;
    row.n_correct += o.correct;
    tally(s.cue_number == Number::Singular ? row.singular : row.plural, o.correct);
    if (auto c = s.attractor_congruent())
      tally(*c ? row.attractor_congruent : row.attractor_incongruent, o.correct);
  }
  row.accuracy = row.n_items == 0 ? 0.0
                                  : static_cast<double>(row.n_correct) / static_cast<double>(row.n_items);
  if (options.keep_items) row.items = std::move(outcomes);

  EvalReport report;
  report.rows.push_back(std::move(row));
  report.aggregate();
  return report;
}

EvalReport run_exp1(const Exp1Inputs& datasets, Scorer& scorer, const EvalOptions& options) {
  EvalReport report;
  for (const auto& [template_id, by_source] : datasets) {
    for (Source src : {Source::ML, Source::WIKI, Source::NONCE}) {
      auto it = by_source.find(src);
      if (it == by_source.end()) {
        EvalRow absent;
        absent.template_id = template_id;
        absent.source = src;
        absent.condition = "exp1";
        absent.absent = true;
        report.rows.push_back(std::move(absent));
        continue;
      }
      EvalOptions o = options;
      o.condition = "exp1";
      Dataset d = it->second;
      d.template_id = template_id;
      d.source = src;
      auto r = evaluate(d, scorer, o);
      std::move(r.rows.begin(), r.rows.end(), std::back_inserter(report.rows));
    }
  }
  report.aggregate();
  return report;
}

EvalReport run_exp2(const Dataset& wiki, const Template& t, const Lexicon& lex, Scorer& scorer,
                    const Exp2Options& options, const Dataset* nonce_baseline) {
  if (wiki.items.empty()) throw EvalError("exp2 needs a non-empty dataset");
  if (options.repetitions == 0) throw EvalError("exp2 needs at least one repetition");
  EvalReport report;
  auto add = [&report](EvalReport r) {
    std::move(r.rows.begin(), r.rows.end(), std::back_inserter(report.rows));
  };
  EvalOptions base = options.eval;
  base.condition = "baseline";
  base.position.reset();
  add(evaluate(wiki, scorer, base));
  if (nonce_baseline) add(evaluate(*nonce_baseline, scorer, base));

  const DictionaryIndex idx(lex);
  for (std::size_t position : replaceable_positions(t)) {
    for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
      const Dataset derived =
          replace_position(wiki, t, idx, position, rep, options.seed, options.eval.jobs);
      EvalOptions o = options.eval;
      o.condition = "replace";
      o.position = position;
      o.repetition = rep;
      add(evaluate(derived, scorer, o));
    }
  }
  report.aggregate();
  return report;
}

}  // namespace sva
