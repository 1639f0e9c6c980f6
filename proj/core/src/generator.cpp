#include "sva/generator.hpp"

#include <algorithm>
#include <unordered_set>

#include "sva/util.hpp"

namespace sva {
namespace {

constexpr int kMaxClashRedraws = 32;
constexpr int kMaxUniqueRedraws = 1000;

// Streams kept apart so that adding a draw for one purpose never shifts another.
enum Stream : std::uint64_t { kWord = 1, kNumber = 2, kReplace = 3 };

const char* category_pool_name(Category c) {
  switch (c) {
    case Category::Det: return "determiners";
    case Category::Noun: return "nouns";
    case Category::Verb: return "verbs";
    case Category::StativeVerb: return "stative_verbs";
    case Category::Prep: return "prepositions";
    default: return "closed class";
  }
}

class ItemBuilder {
 public:
  ItemBuilder(const Template& t, const DictionaryIndex& idx, std::uint64_t seed,
              const GenerateOptions& opt)
      : t_(t), idx_(idx), seed_(seed), opt_(opt) {}

  Stimulus build(std::size_t item, std::uint64_t salt) const {
    const std::size_t n = t_.size();
    const Number cue_number = item % 2 == 0 ? Number::Singular : Number::Plural;
    std::vector<std::optional<Number>> numbers(n);
    for (const Slot& s : t_.slots) {
      if (s.category != Category::Noun) continue;
      switch (s.role == SlotRole::Cue ? NumberPolicy::SameAsCue : s.number_policy) {
        case NumberPolicy::SameAsCue: numbers[s.index] = cue_number; break;
        case NumberPolicy::OppositeOfCue: numbers[s.index] = opposite(cue_number); break;
        default:
          numbers[s.index] = (draw(item, s.index, kNumber, salt) & 1) ? Number::Plural
                                                                     : Number::Singular;
      }
    }
    for (const Slot& s : t_.slots)
      if (is_verb(s.category)) numbers[s.index] = numbers[*s.agrees_with];

    Stimulus st;
    st.tokens.resize(n);
    std::uint32_t target_pair = 0;
    for (const Slot& s : t_.slots) {
      if (s.fixed_form) {
        st.tokens[s.index] = *s.fixed_form;
        continue;
      }
      const auto id = pick(item, s, salt, 0);
      st.tokens[s.index] = idx_.form(s.category, id, numbers[s.index].value_or(Number::Singular));
      if (s.role == SlotRole::Target) target_pair = id;
    }

    const std::size_t cue_at = t_.cue_index();
    const std::size_t target_at = t_.target_index();
    const Slot& target_slot = t_.slots[target_at];
    if (opt_.avoid_cue_target_clash) {
      for (int attempt = 1;
           attempt <= kMaxClashRedraws && st.tokens[target_at] == st.tokens[cue_at]; ++attempt) {
        target_pair = pick(item, target_slot, salt, attempt);
        st.tokens[target_at] = idx_.form(target_slot.category, target_pair, cue_number);
      }
    }

    st.template_id = t_.id;
    st.cue_index = cue_at;
    st.cue_number = cue_number;
    st.target_index = target_at;
    st.correct_form = st.tokens[target_at];
    st.incorrect_form = idx_.form(target_slot.category, target_pair, opposite(cue_number));
    if (auto a = t_.attractor_index()) {
      st.attractor_index = *a;
      st.attractor_number = numbers[*a];
    }
    st.source = Source::NONCE;
    st.seed_trace = "nonce:" + std::to_string(seed_) + ":" + std::to_string(item);
    if (salt != 0) st.seed_trace += ":u" + std::to_string(salt);
    if (opt_.terminal_period) st.tokens.emplace_back(".");
    return st;
  }

 private:
  std::uint64_t draw(std::size_t item, std::size_t slot, Stream stream, std::uint64_t salt,
                     std::uint64_t attempt = 0) const {
    return rng::mix(seed_, item, slot, (static_cast<std::uint64_t>(stream) << 56) ^ attempt, salt);
  }

  std::uint32_t pick(std::size_t item, const Slot& s, std::uint64_t salt, int attempt) const {
    const std::size_t pool = idx_.pool_size(s.category);
    return static_cast<std::uint32_t>(
        rng::bounded(draw(item, s.index, kWord, salt, static_cast<std::uint64_t>(attempt)), pool));
  }

  const Template& t_;
  const DictionaryIndex& idx_;
  std::uint64_t seed_;
  const GenerateOptions& opt_;
};

void check_pools(const Template& t, const DictionaryIndex& idx) {
  for (const Slot& s : t.slots) {
    if (s.fixed_form) continue;
    if (idx.pool_size(s.category) == 0)
      throw GeneratorError("template " + t.id + " needs " + category_pool_name(s.category) +
                           " but the lexicon has none");
  }
}

std::optional<std::uint32_t> find_in_pool(const DictionaryIndex& idx, Category c,
                                          const std::string& word, std::optional<Number> number) {
  for (const Reading& r : idx.lookup(word)) {
    if (r.category != c) continue;
    if (number && r.number && *r.number != *number) continue;
    return r.id;
  }
  return std::nullopt;
}

}  // namespace

Dataset generate(const Template& t, const Lexicon& lex, std::size_t n, std::uint64_t seed,
                 const GenerateOptions& options) {
  validate(t);
  if (n % 2 != 0) throw GeneratorError("dataset size must be even to balance cue numbers");
  const DictionaryIndex idx(lex);
  check_pools(t, idx);
  const ItemBuilder builder(t, idx, seed, options);

  Dataset d;
  d.template_id = t.id;
  d.source = Source::NONCE;
  d.generation_seed = seed;
  d.items.resize(n);
  parallel_for(n, options.jobs, [&](std::size_t i) { d.items[i] = builder.build(i, 0); });

  if (options.unique) {
    // Sequential pass so the set of redrawn items does not depend on scheduling.
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t salt = 0;
      while (!seen.insert(d.items[i].sentence()).second) {
        if (++salt > kMaxUniqueRedraws)
          throw GeneratorError("cannot find " + std::to_string(n) +
                               " distinct sentences for template " + t.id);
        d.items[i] = builder.build(i, salt);
      }
    }
  }
  return d;
}

std::vector<std::size_t> replaceable_positions(const Template& t) {
  std::vector<std::size_t> out;
  for (const Slot& s : t.slots)
    if (!s.fixed_form) out.push_back(s.index);
  return out;
}

std::vector<std::optional<Number>> slot_numbers(const Stimulus& s, const Template& t,
                                                const DictionaryIndex& idx) {
  std::vector<std::optional<Number>> numbers(t.size());
  for (const Slot& slot : t.slots) {
    if (slot.category != Category::Noun) continue;
    if (slot.role == SlotRole::Cue) {
      numbers[slot.index] = s.cue_number;
    } else if (slot.role == SlotRole::Attractor && s.attractor_number) {
      numbers[slot.index] = s.attractor_number;
    } else if (slot.index < s.tokens.size()) {
      for (const Reading& r : idx.lookup(s.tokens[slot.index])) {
        if (r.category == Category::Noun) {
          numbers[slot.index] = r.number;
          break;
        }
      }
    }
  }
  for (const Slot& slot : t.slots)
    if (is_verb(slot.category)) numbers[slot.index] = numbers[*slot.agrees_with];
  return numbers;
}

std::pair<Stimulus, Replacement> replace_one(const Stimulus& s, const Template& t,
                                             std::size_t position, const DictionaryIndex& idx,
                                             std::uint64_t seed) {
  if (position >= t.size() || position >= s.tokens.size())
    throw GeneratorError("position " + std::to_string(position) + " out of range for template " +
                         t.id);
  const Slot& slot = t.slots[position];
  if (slot.fixed_form)
    throw GeneratorError("slot " + std::to_string(position) + " of template " + t.id +
                         " holds a fixed word and cannot be replaced");
  const std::size_t pool = idx.pool_size(slot.category);
  if (pool < 2)
    throw GeneratorError(std::string("replacement pool for ") + category_pool_name(slot.category) +
                         " has fewer than two entries");

  const auto numbers = slot_numbers(s, t, idx);
  const std::optional<Number> number = carries_number(slot.category) ? numbers[position] : std::nullopt;
  if (carries_number(slot.category) && !number)
    throw GeneratorError("cannot determine the number of '" + s.tokens[position] + "' at slot " +
                         std::to_string(position));

  const std::string& original = s.tokens[position];
  const std::string folded = fold_case(original);
  const auto original_id = find_in_pool(idx, slot.category, folded, number);
  const Number n = number.value_or(Number::Singular);

  std::uint32_t id = 0;
  if (original_id) {
    // Uniform over the pool minus the original entry.
    const auto r = rng::bounded(rng::mix(seed, kReplace, position), pool - 1);
    id = static_cast<std::uint32_t>(r >= *original_id ? r + 1 : r);
  } else {
    bool found = false;
    for (std::uint64_t attempt = 0; attempt < 64 && !found; ++attempt) {
      id = static_cast<std::uint32_t>(
          rng::bounded(rng::mix(seed, kReplace, position, attempt + 1), pool));
      found = idx.form(slot.category, id, n) != folded;
    }
    if (!found) throw GeneratorError("no replacement differs from '" + original + "'");
  }

  Stimulus out = s;
  out.tokens[position] = idx.form(slot.category, id, n);
  if (position == s.target_index) {
    out.correct_form = idx.form(slot.category, id, s.cue_number);
    out.incorrect_form = idx.form(slot.category, id, opposite(s.cue_number));
    out.tokens[position] = out.correct_form;
  }
  out.seed_trace += ";replace@" + std::to_string(position);
  Replacement rep{position, original, out.tokens[position], number};
  return {std::move(out), std::move(rep)};
}

std::pair<Stimulus, Replacement> replace_one(const Stimulus& s, const Template& t,
                                             std::size_t position, const Lexicon& lex,
                                             std::uint64_t seed) {
  return replace_one(s, t, position, DictionaryIndex(lex), seed);
}

Dataset replace_position(const Dataset& d, const Template& t, const DictionaryIndex& idx,
                         std::size_t position, std::size_t repetition, std::uint64_t seed,
                         unsigned jobs) {
  Dataset derived;
  derived.template_id = d.template_id;
  derived.source = d.source;
  derived.generation_seed = seed;
  derived.items.resize(d.items.size());
  parallel_for(d.items.size(), jobs, [&](std::size_t i) {
    const std::uint64_t item_seed = rng::mix(seed, position, repetition, i);
    derived.items[i] = replace_one(d.items[i], t, position, idx, item_seed).first;
  });
  return derived;
}

AblationMap ablation_sweep(const Dataset& d, const Template& t, const Lexicon& lex,
                           std::size_t repetitions, std::uint64_t seed, unsigned jobs) {
  if (repetitions == 0) throw GeneratorError("repetitions must be at least 1");
  const DictionaryIndex idx(lex);
  AblationMap out;
  for (std::size_t position : replaceable_positions(t)) {
    auto& reps = out[position];
    for (std::size_t r = 0; r < repetitions; ++r)
      reps.push_back(replace_position(d, t, idx, position, r, seed, jobs));
  }
  return out;
}

}  // namespace sva
