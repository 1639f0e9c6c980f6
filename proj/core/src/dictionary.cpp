#include "sva/dictionary.hpp"

#include <algorithm>
#include <stdexcept>

#include "sva/util.hpp"

namespace sva {

DictionaryIndex::DictionaryIndex(Lexicon lex) : lex_(std::move(lex)) {
  auto u32 = [](std::size_t i) { return static_cast<std::uint32_t>(i); };
  for (std::size_t i = 0; i < lex_.determiners.size(); ++i)
    add(lex_.determiners[i], {Category::Det, std::nullopt, u32(i)});
  for (std::size_t i = 0; i < lex_.nouns.size(); ++i) {
    add(lex_.nouns[i].singular, {Category::Noun, Number::Singular, u32(i)});
    add(lex_.nouns[i].plural, {Category::Noun, Number::Plural, u32(i)});
  }
  for (std::size_t i = 0; i < lex_.verbs.size(); ++i) {
    add(lex_.verbs[i].third_singular, {Category::Verb, Number::Singular, u32(i)});
    add(lex_.verbs[i].plural_base, {Category::Verb, Number::Plural, u32(i)});
  }
  for (std::size_t i = 0; i < lex_.stative_verbs.size(); ++i) {
    add(lex_.stative_verbs[i].third_singular, {Category::StativeVerb, Number::Singular, u32(i)});
    add(lex_.stative_verbs[i].plural_base, {Category::StativeVerb, Number::Plural, u32(i)});
  }
  for (std::size_t i = 0; i < lex_.prepositions.size(); ++i)
    add(lex_.prepositions[i], {Category::Prep, std::nullopt, u32(i)});
  add(lex_.complementizer, {Category::Comp, std::nullopt, 0});
  add(lex_.conjunction, {Category::Conj, std::nullopt, 0});

  for (auto& [word, entry] : map_) {
    std::sort(entry.readings.begin(), entry.readings.end());
    entry.readings.erase(std::unique(entry.readings.begin(), entry.readings.end()),
                         entry.readings.end());
    entries_ += entry.readings.size();
  }
}

void DictionaryIndex::add(const std::string& word, Reading r) {
  Entry& e = map_[fold_case(word)];
  e.readings.push_back(r);
  e.mask |= category_bit(r.category);
}

std::span<const Reading> DictionaryIndex::lookup(std::string_view word) const {
  auto it = map_.find(fold_case(word));
  if (it == map_.end()) return {};
  return it->second.readings;
}

std::uint8_t DictionaryIndex::category_mask(std::string_view word) const {
  auto it = map_.find(fold_case(word));
  return it == map_.end() ? 0 : it->second.mask;
}

const std::string& DictionaryIndex::form(Category c, std::uint32_t id, Number n) const {
  switch (c) {
    case Category::Det: return lex_.determiners.at(id);
    case Category::Noun: return lex_.nouns.at(id).form(n);
    case Category::Verb: return lex_.verbs.at(id).form(n);
    case Category::StativeVerb: return lex_.stative_verbs.at(id).form(n);
    case Category::Prep: return lex_.prepositions.at(id);
    case Category::Comp: return lex_.complementizer;
    case Category::Conj: return lex_.conjunction;
  }
  throw std::logic_error("bad category");
}

std::size_t DictionaryIndex::pool_size(Category c) const {
  switch (c) {
    case Category::Det: return lex_.determiners.size();
    case Category::Noun: return lex_.nouns.size();
    case Category::Verb: return lex_.verbs.size();
    case Category::StativeVerb: return lex_.stative_verbs.size();
    case Category::Prep: return lex_.prepositions.size();
    case Category::Comp:
    case Category::Conj: return 1;
  }
  return 0;
}

}  // namespace sva
