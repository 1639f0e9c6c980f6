#pragma once

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sva/number.hpp"

namespace sva {

class LexiconError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NounPair {
  std::string singular;
  std::string plural;

  const std::string& form(Number n) const noexcept {
    return n == Number::Singular ? singular : plural;
  }
  auto operator<=>(const NounPair&) const = default;
};

/// A verb in its two present-tense forms. `third_singular` agrees with a singular
/// subject ("laughs"), `plural_base` with a plural one ("laugh").
struct VerbPair {
  std::string third_singular;
  std::string plural_base;

  const std::string& form(Number n) const noexcept {
    return n == Number::Singular ? third_singular : plural_base;
  }
  auto operator<=>(const VerbPair&) const = default;
};

/// Immutable after construction; every list is in canonical (lexicographic) order.
struct Lexicon {
  std::vector<NounPair> nouns;
  std::vector<VerbPair> verbs;
  std::vector<VerbPair> stative_verbs;
  std::vector<std::string> determiners;
  std::vector<std::string> prepositions;
  std::string complementizer = "that";
  std::string conjunction = "and";

  bool operator==(const Lexicon&) const = default;
};

struct LexiconOptions {
  /// Drop the present forms of "be" (is/are/am) from verb lists.
  bool exclude_be = true;
};

bool is_be_form(std::string_view form);

// Per-file parsers. `source` names the input in error messages ("verbs.txt:12: ...").
std::vector<NounPair> parse_noun_pairs(std::istream& in, std::string_view source);
std::vector<VerbPair> parse_verb_pairs(std::istream& in, std::string_view source,
                                       const LexiconOptions& options = {});
std::vector<std::string> parse_word_list(std::istream& in, std::string_view source);

/// Canonicalises (sort + dedup) and validates. Throws LexiconError.
Lexicon make_lexicon(std::vector<NounPair> nouns, std::vector<VerbPair> verbs,
                     std::vector<VerbPair> stative_verbs, std::vector<std::string> determiners,
                     std::vector<std::string> prepositions);

/// Loads the five vocabulary files named by a JSON manifest:
/// {"nouns": ..., "verbs": ..., "stative_verbs": ..., "determiners": ..., "prepositions": ...}
/// Relative paths resolve against the manifest's directory.
Lexicon load_lexicon(const std::filesystem::path& manifest, const LexiconOptions& options = {});

/// Keeps only verb pairs (and noun pairs when `include_nouns`) whose two forms are both
/// single tokens of a scorer's vocabulary. Throws LexiconError if no verb pair survives.
Lexicon filter_by_scorer_vocab(const Lexicon& lex, const std::unordered_set<std::string>& vocab,
                               bool include_nouns = false);

/// Stable hash of the canonical lexicon content.
std::string lexicon_fingerprint(const Lexicon& lex);

/// Every form the lexicon can emit, open and closed class.
std::vector<std::string> all_forms(const Lexicon& lex);

/// Location of the bundled vocabulary manifest (build tree or install prefix).
std::filesystem::path default_lexicon_manifest();

}  // namespace sva
