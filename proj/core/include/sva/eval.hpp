#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sva/lexicon.hpp"
#include "sva/scorer.hpp"
#include "sva/stimulus.hpp"
#include "sva/template.hpp"

namespace sva {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ItemOutcome {
  std::size_t index = 0;
  bool skipped = false;
  bool correct = false;
  std::array<double, 2> scores{};
  std::string note;

  bool operator==(const ItemOutcome&) const = default;
};

/// Correct/total for a subset of items.
struct Tally {
  std::size_t n = 0;
  std::size_t correct = 0;

  double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n); }
  bool operator==(const Tally&) const = default;
};

/// One evaluated dataset.
struct EvalRow {
  std::string template_id;
  Source source = Source::NONCE;
  std::string condition;
  std::optional<std::size_t> position;
  std::size_t repetition = 0;
  std::size_t n_items = 0;
  std::size_t n_correct = 0;
  std::size_t skipped = 0;
  double accuracy = 0.0;
  /// Requested but no data was supplied; counts are zero.
  bool absent = false;
  Tally singular;
  Tally plural;
  Tally attractor_congruent;
  Tally attractor_incongruent;
  std::vector<ItemOutcome> items;

  bool operator==(const EvalRow&) const = default;
};

/// Mean and sample standard deviation of accuracy over the repetitions of one
/// (template, source, condition, position) cell.
struct Aggregate {
  std::string template_id;
  Source source = Source::NONCE;
  std::string condition;
  std::optional<std::size_t> position;
  std::size_t repetitions = 0;
  double mean = 0.0;
  double stddev = 0.0;
  /// Same statistics restricted to attractor-incongruent items (cells with attractors only).
  std::optional<double> incongruent_mean;

  bool operator==(const Aggregate&) const = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<Aggregate> aggregates;

  void append(EvalReport other);
  /// Recomputes `aggregates` from `rows` (absent rows are ignored).
  void aggregate();
  bool operator==(const EvalReport&) const = default;
};

struct EvalOptions {
  std::size_t batch_size = 64;
  unsigned jobs = 1;
  /// Extra attempts after a ScorerTransportError before giving up.
  unsigned max_retries = 2;
  std::string condition = "base";
  std::optional<std::size_t> position;
  std::size_t repetition = 0;
  /// Keep per-item outcomes in the row.
  bool keep_items = true;
};

/// Scores every item: correct iff score(correct form) > score(incorrect form), so ties are
/// wrong. Items whose forms are outside the scorer's vocabulary, or that the scorer
/// answers with an error, are skipped and counted.
EvalReport evaluate(const Dataset& d, Scorer& scorer, const EvalOptions& options = {});

/// Datasets for one template, by source; missing sources are reported as absent cells.
using Exp1Inputs = std::map<std::string, std::map<Source, Dataset>>;

EvalReport run_exp1(const Exp1Inputs& datasets, Scorer& scorer, const EvalOptions& options = {});

struct Exp2Options {
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
  EvalOptions eval;
};

/// One-word replacement sweep over a WIKI dataset: per-position rows for every
/// repetition plus the unreplaced baseline and, if given, the NONCE baseline.
EvalReport run_exp2(const Dataset& wiki, const Template& t, const Lexicon& lex, Scorer& scorer,
                    const Exp2Options& options = {}, const Dataset* nonce_baseline = nullptr);

/// Minimal-pair import. One pair per line, tab separated:
///   TEMPLATE <tab> GRAMMATICAL <tab> UNGRAMMATICAL [<tab> CUE_INDEX]
/// Blank lines and '#' comments are ignored. The target is the single differing token.
/// The cue defaults to the template's cue slot when the sentence has the template's length.
std::map<std::string, Dataset> import_ml(std::istream& in, const std::vector<Template>& templates,
                                         const Lexicon* lex = nullptr,
                                         std::string_view source_name = "<stream>");
std::map<std::string, Dataset> import_ml(const std::filesystem::path& path,
                                         const std::vector<Template>& templates,
                                         const Lexicon* lex = nullptr);

// Report encodings.
nlohmann::json to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
/// template,source,condition,position,repetition,n,correct,skipped,accuracy
void write_csv(std::ostream& out, const EvalReport& r);
/// Aggregates as gnuplot-ready columns.
void write_tsv(std::ostream& out, const EvalReport& r);
/// Item-level outcomes, one JSON object per line.
void write_outcomes(std::ostream& out, const EvalReport& r);

}  // namespace sva
