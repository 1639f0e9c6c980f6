#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sva/dictionary.hpp"
#include "sva/lexicon.hpp"
#include "sva/stimulus.hpp"
#include "sva/template.hpp"

namespace sva {

class GeneratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateOptions {
  /// Append a "." token after the last slot.
  bool terminal_period = true;
  /// Redraw the target verb when its correct form equals the cue's surface form.
  bool avoid_cue_target_clash = true;
  /// Reject duplicate sentences within one dataset.
  bool unique = false;
  unsigned jobs = 1;
};

/// Balanced nonce dataset: item i has a singular cue for even i and a plural cue for
/// odd i. Every draw derives from (seed, item, slot), so the output does not depend
/// on `jobs`. Throws GeneratorError for odd n or an empty category pool.
Dataset generate(const Template& t, const Lexicon& lex, std::size_t n, std::uint64_t seed,
                 const GenerateOptions& options = {});

struct Replacement {
  std::size_t position = 0;
  std::string original;
  std::string replacement;
  std::optional<Number> preserved_number;

  bool operator==(const Replacement&) const = default;
};

/// Slot positions that a one-word replacement may target (fixed Comp/Conj slots excluded).
std::vector<std::size_t> replaceable_positions(const Template& t);

/// Number carried by each slot of `s` (nullopt for closed-class slots).
std::vector<std::optional<Number>> slot_numbers(const Stimulus& s, const Template& t,
                                                const DictionaryIndex& idx);

/// Swaps the word at `position` for a different word of the same category and number.
/// Replacing the target re-draws the verb pair, keeping the correct form's number.
std::pair<Stimulus, Replacement> replace_one(const Stimulus& s, const Template& t,
                                             std::size_t position, const DictionaryIndex& idx,
                                             std::uint64_t seed);
std::pair<Stimulus, Replacement> replace_one(const Stimulus& s, const Template& t,
                                             std::size_t position, const Lexicon& lex,
                                             std::uint64_t seed);

/// Applies replace_one at `position` to every item of `d`, with per-item seeds drawn
/// from (seed, position, repetition, item).
Dataset replace_position(const Dataset& d, const Template& t, const DictionaryIndex& idx,
                         std::size_t position, std::size_t repetition, std::uint64_t seed,
                         unsigned jobs = 1);

/// position -> `repetitions` datasets, each replacing that position in every item
/// with an independent draw.
using AblationMap = std::map<std::size_t, std::vector<Dataset>>;
AblationMap ablation_sweep(const Dataset& d, const Template& t, const Lexicon& lex,
                           std::size_t repetitions, std::uint64_t seed, unsigned jobs = 1);

}  // namespace sva
