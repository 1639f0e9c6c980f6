#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "sva/corpus.hpp"
#include "sva/lexicon.hpp"
#include "sva/template.hpp"

namespace sva::testing {

inline Lexicon bundled_lexicon() { return load_lexicon(default_lexicon_manifest()); }

/// Small hand-made lexicon used by the worked examples.
inline Lexicon tiny_lexicon() {
  return make_lexicon({{"boy", "boys"}, {"plate", "plates"}, {"glass", "glasses"}, {"door", "doors"}},
                      {{"laughs", "laugh"}, {"breaks", "break"}, {"plays", "play"}},
                      {{"believes", "believe"}, {"knows", "know"}},
                      {"the", "my"}, {"near", "in"});
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("sva-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Lexicon with disjoint, made-up forms: "n<k>"/"n<k>z" nouns, "v<k>s"/"v<k>" verbs.
inline Lexicon synthetic_lexicon(std::size_t nouns, std::size_t verbs) {
  std::vector<NounPair> np;
  std::vector<VerbPair> vp, sp;
  for (std::size_t i = 0; i < nouns; ++i) np.push_back({"n" + std::to_string(i), "n" + std::to_string(i) + "z"});
  for (std::size_t i = 0; i < verbs; ++i) vp.push_back({"v" + std::to_string(i) + "s", "v" + std::to_string(i)});
  for (std::size_t i = 0; i < 3; ++i) sp.push_back({"st" + std::to_string(i) + "s", "st" + std::to_string(i)});
  return make_lexicon(std::move(np), std::move(vp), std::move(sp), {"the", "my", "its"}, {"near", "in"});
}

/// Brute-force reference matcher. It rebuilds word readings straight from the lexicon
/// and tries every template at every offset; only the tie-break between overlapping
/// matches of one template mirrors the scanner (earliest wins).
class NaiveMatcher {
 public:
  struct Hit {
    std::string document_id;
    std::size_t offset;
    std::string template_id;
    std::vector<std::string> tokens;
    Number cue_number;
    std::optional<Number> attractor_number;
    std::string correct;
    std::string incorrect;

    auto operator<=>(const Hit&) const = default;
  };

  explicit NaiveMatcher(const Lexicon& lex) : lex_(lex) {}

  std::vector<Hit> run(const std::vector<Document>& docs, const std::vector<Template>& templates) const {
    std::vector<Hit> hits;
    for (const auto& doc : docs) {
      const auto tokens = tokenize(doc.text);
      for (const auto& t : templates) {
        std::size_t blocked_until = 0;
        for (std::size_t i = 0; i + t.size() <= tokens.size(); ++i) {
          if (i < blocked_until) continue;
          auto h = try_at(tokens, i, t);
          if (!h) continue;
          h->document_id = doc.id;
          hits.push_back(*h);
          blocked_until = i + t.size();
        }
      }
    }
    std::sort(hits.begin(), hits.end());
    return hits;
  }

  static bool terminal(const std::string& w) {
    return !w.empty() && w.find_first_not_of(".?!") == std::string::npos;
  }

 private:
  struct Read {
    std::optional<Number> number;
    const VerbPair* verb = nullptr;
  };

  std::optional<Read> read(const std::string& w, Category c) const {
    auto num_of = [&](const auto& pairs, auto sg, auto pl) -> std::optional<Read> {
      for (const auto& p : pairs) {
        if (p.*sg == w) return Read{Number::Singular, nullptr};
        if (p.*pl == w) return Read{Number::Plural, nullptr};
      }
      return std::nullopt;
    };
    auto verb_of = [&](const std::vector<VerbPair>& pairs) -> std::optional<Read> {
      for (const auto& p : pairs) {
        if (p.third_singular == w) return Read{Number::Singular, &p};
        if (p.plural_base == w) return Read{Number::Plural, &p};
      }
      return std::nullopt;
    };
    auto in = [&](const std::vector<std::string>& list) {
      return std::find(list.begin(), list.end(), w) != list.end();
    };
    switch (c) {
      case Category::Noun: return num_of(lex_.nouns, &NounPair::singular, &NounPair::plural);
      case Category::Verb: return verb_of(lex_.verbs);
      case Category::StativeVerb: return verb_of(lex_.stative_verbs);
      case Category::Det: return in(lex_.determiners) ? std::optional<Read>(Read{}) : std::nullopt;
      case Category::Prep: return in(lex_.prepositions) ? std::optional<Read>(Read{}) : std::nullopt;
      case Category::Comp: return w == lex_.complementizer ? std::optional<Read>(Read{}) : std::nullopt;
      case Category::Conj: return w == lex_.conjunction ? std::optional<Read>(Read{}) : std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<Hit> try_at(const std::vector<std::string>& tokens, std::size_t i, const Template& t) const {
    std::vector<Read> r;
    for (const auto& s : t.slots) {
      std::string w = tokens[i + s.index];
      if (terminal(w)) return std::nullopt;
      for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (s.fixed_form && w != *s.fixed_form) return std::nullopt;
      auto got = read(w, s.category);
      if (!got) return std::nullopt;
      r.push_back(*got);
    }
    for (const auto& s : t.slots)
      if (s.agrees_with && r[s.index].number != r[*s.agrees_with].number) return std::nullopt;
    Hit h;
    h.offset = i;
    h.template_id = t.id;
    h.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + t.size()));
    if (i + t.size() < tokens.size() && terminal(tokens[i + t.size()])) h.tokens.push_back(tokens[i + t.size()]);
    h.cue_number = *r[t.cue_index()].number;
    if (auto a = t.attractor_index()) h.attractor_number = r[*a].number;
    const VerbPair* v = r[t.target_index()].verb;
    h.correct = tokens[i + t.target_index()];
    h.incorrect = v->form(opposite(h.cue_number));
    return h;
  }

  const Lexicon& lex_;
};

inline std::vector<NaiveMatcher::Hit> as_hits(const std::vector<MatchRecord>& records) {
  std::vector<NaiveMatcher::Hit> out;
  for (const auto& r : records)
    out.push_back({r.document_id, r.token_offset, r.stimulus.template_id, r.stimulus.tokens,
                   r.stimulus.cue_number, r.stimulus.attractor_number, r.stimulus.correct_form,
                   r.stimulus.incorrect_form});
  std::sort(out.begin(), out.end());
  return out;
}

/// Random corpus mixing sentences built from template signatures with word noise.
inline std::vector<Document> random_corpus(std::mt19937_64& rng, const Lexicon& lex,
                                           const std::vector<Template>& templates,
                                           std::size_t max_tokens) {
  std::vector<std::string> words;
  for (const auto& w : all_forms(lex)) words.push_back(w);
  words.insert(words.end(), {"foo", "bar", ".", "?", "!"});
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  auto pool = [&](Category c) -> std::vector<std::string> {
    std::vector<std::string> v;
    switch (c) {
      case Category::Noun: for (const auto& p : lex.nouns) v.insert(v.end(), {p.singular, p.plural}); break;
      case Category::Verb: for (const auto& p : lex.verbs) v.insert(v.end(), {p.third_singular, p.plural_base}); break;
      case Category::StativeVerb:
        for (const auto& p : lex.stative_verbs) v.insert(v.end(), {p.third_singular, p.plural_base});
        break;
      case Category::Det: v = lex.determiners; break;
      case Category::Prep: v = lex.prepositions; break;
      case Category::Comp: v = {lex.complementizer}; break;
      case Category::Conj: v = {lex.conjunction}; break;
    }
    return v;
  };
  std::vector<Document> docs;
  const std::size_t ndocs = 1 + rng() % 3;
  for (std::size_t d = 0; d < ndocs; ++d) {
    const std::size_t budget = max_tokens / ndocs;
    std::vector<std::string> toks;
    while (toks.size() < budget) {
      if (rng() % 3 == 0) {
        toks.push_back(pick(words));
        continue;
      }
      // Signature-shaped run: forms have random numbers, so some runs agree and some don't.
      const Template& t = templates[rng() % templates.size()];
      if (toks.size() + t.size() > budget) break;
      for (const auto& s : t.slots) {
        std::string w = pick(pool(s.category));
        if (rng() % 7 == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        toks.push_back(w);
      }
      if (rng() % 2 == 0) toks.push_back(".");
    }
    std::string text;
    for (const auto& w : toks) text += w + " ";
    docs.push_back({"doc" + std::to_string(d), text});
  }
  return docs;
}

}  // namespace sva::testing
