#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sva/lexicon.hpp"
#include "sva/template.hpp"

namespace sva {

/// One way of reading a word: its category, the number it carries (nouns and verbs
/// only) and which pair or list entry it came from.
struct Reading {
  Category category = Category::Det;
  std::optional<Number> number;
  std::uint32_t id = 0;

  auto operator<=>(const Reading&) const = default;
};

constexpr std::uint8_t category_bit(Category c) noexcept {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c));
}

/// Word -> readings map over a lexicon. Readings of a word are ordered by
/// (category, id, number); matchers rely on that order for tie-breaking.
class DictionaryIndex {
 public:
  explicit DictionaryIndex(Lexicon lex);

  /// Case-folds `word` before lookup. Empty span for unknown words.
  std::span<const Reading> lookup(std::string_view word) const;
  std::uint8_t category_mask(std::string_view word) const;

  /// Number of readings over all keys.
  std::size_t entry_count() const noexcept { return entries_; }
  std::size_t key_count() const noexcept { return map_.size(); }

  const Lexicon& lexicon() const noexcept { return lex_; }

  /// Surface form of a reading's pair in the requested number (or the closed-class word).
  const std::string& form(Category c, std::uint32_t id, Number n = Number::Singular) const;
  std::size_t pool_size(Category c) const;

 private:
  struct Entry {
    std::vector<Reading> readings;
    std::uint8_t mask = 0;
  };
  void add(const std::string& word, Reading r);

  Lexicon lex_;
  std::unordered_map<std::string, Entry> map_;
  std::size_t entries_ = 0;
};

}  // namespace sva
