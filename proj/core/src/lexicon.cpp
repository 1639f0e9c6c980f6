#include "sva/lexicon.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sva/util.hpp"

namespace sva {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << source << ':' << line << ": " << msg;
  throw LexiconError(os.str());
}

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

void check_form(std::string_view source, std::size_t line, const std::string& form) {
  if (form.empty()) fail(source, line, "empty word form");
  if (has_space(form)) fail(source, line, "word form '" + form + "' contains whitespace");
}

struct RawLine {
  std::size_t number;
  std::string text;
};

// Non-blank, non-comment lines with their 1-based line numbers.
std::vector<RawLine> content_lines(std::istream& in) {
  std::vector<RawLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back({n, fold_case(t)});
  }
  return out;
}

std::pair<std::string, std::string> split_pair(std::string_view source, const RawLine& l) {
  const auto comma = l.text.find(',');
  if (comma == std::string::npos || l.text.find(',', comma + 1) != std::string::npos)
    fail(source, l.number, "expected exactly two comma-separated forms, got '" + l.text + "'");
  std::string a = trim(std::string_view(l.text).substr(0, comma));
  std::string b = trim(std::string_view(l.text).substr(comma + 1));
  check_form(source, l.number, a);
  check_form(source, l.number, b);
  if (a == b) fail(source, l.number, "both forms are '" + a + "'");
  return {std::move(a), std::move(b)};
}

// Shared by nouns and verbs: exact duplicates collapse, any other reuse of a form
// (same first form with a different second, or a form shared by two pairs) is an error.
template <class Pair>
std::vector<Pair> collect_pairs(std::istream& in, std::string_view source,
                                const LexiconOptions* verb_options) {
  std::vector<Pair> out;
  std::map<std::string, std::pair<std::size_t, std::size_t>> seen;  // form -> (pair idx, line)
  for (const RawLine& l : content_lines(in)) {
    auto [first, second] = split_pair(source, l);
    if (verb_options && verb_options->exclude_be && (is_be_form(first) || is_be_form(second)))
      continue;
    auto it1 = seen.find(first);
    auto it2 = seen.find(second);
    Pair candidate{first, second};
    if (it1 != seen.end() && it2 != seen.end() && it1->second.first == it2->second.first &&
        out[it1->second.first] == candidate)
      continue;
    for (auto* it : {&it1, &it2}) {
      if (*it != seen.end()) {
        fail(source, l.number,
             "form '" + (*it)->first + "' already used by the pair on line " +
                 std::to_string((*it)->second.second));
      }
    }
    seen.emplace(first, std::pair{out.size(), l.number});
    seen.emplace(second, std::pair{out.size(), l.number});
    out.push_back(std::move(candidate));
  }
  return out;
}

template <class Pair, class Proj1, class Proj2>
void canonicalise_pairs(std::vector<Pair>& pairs, std::string_view what, Proj1 first,
                        Proj2 second) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::unordered_map<std::string, std::size_t> owner;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const std::string* f : {&first(pairs[i]), &second(pairs[i])}) {
      if (f->empty() || has_space(*f))
        throw LexiconError(std::string(what) + ": invalid word form '" + *f + "'");
      if (fold_case(*f) != *f)
        throw LexiconError(std::string(what) + ": word form '" + *f + "' is not lowercase");
      auto [it, inserted] = owner.emplace(*f, i);
      if (!inserted && it->second != i)
        throw LexiconError(std::string(what) + ": form '" + *f + "' appears in two pairs");
      if (!inserted)
        throw LexiconError(std::string(what) + ": pair with identical forms '" + *f + "'");
    }
  }
}

void canonicalise_words(std::vector<std::string>& words, std::string_view what) {
  for (const auto& w : words) {
    if (w.empty() || has_space(w) || fold_case(w) != w)
      throw LexiconError(std::string(what) + ": invalid word form '" + w + "'");
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
}

std::ifstream open_listed(const std::filesystem::path& base, const nlohmann::json& manifest,
                          const char* key, std::string& shown) {
  if (!manifest.contains(key) || !manifest[key].is_string())
    throw LexiconError("lexicon manifest: missing string entry '" + std::string(key) + "'");
  std::filesystem::path p = manifest[key].get<std::string>();
  if (p.is_relative()) p = base / p;
  std::ifstream in(p);
  if (!in) throw LexiconError("cannot open " + p.string());
  shown = p.filename().string();
  return in;
}

}  // namespace

bool is_be_form(std::string_view form) {
  const std::string f = fold_case(form);
  return f == "is" || f == "are" || f == "am";
}

std::vector<NounPair> parse_noun_pairs(std::istream& in, std::string_view source) {
  return collect_pairs<NounPair>(in, source, nullptr);
}

std::vector<VerbPair> parse_verb_pairs(std::istream& in, std::string_view source,
                                       const LexiconOptions& options) {
  return collect_pairs<VerbPair>(in, source, &options);
}

std::vector<std::string> parse_word_list(std::istream& in, std::string_view source) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const RawLine& l : content_lines(in)) {
    check_form(source, l.number, l.text);
    if (seen.insert(l.text).second) out.push_back(l.text);
  }
  return out;
}

Lexicon make_lexicon(std::vector<NounPair> nouns, std::vector<VerbPair> verbs,
                     std::vector<VerbPair> stative_verbs, std::vector<std::string> determiners,
                     std::vector<std::string> prepositions) {
  Lexicon lex;
  canonicalise_pairs(nouns, "nouns", [](const NounPair& p) -> const std::string& { return p.singular; },
                     [](const NounPair& p) -> const std::string& { return p.plural; });
  auto v1 = [](const VerbPair& p) -> const std::string& { return p.third_singular; };
  auto v2 = [](const VerbPair& p) -> const std::string& { return p.plural_base; };
  canonicalise_pairs(verbs, "verbs", v1, v2);
  canonicalise_pairs(stative_verbs, "stative_verbs", v1, v2);
  canonicalise_words(determiners, "determiners");
  canonicalise_words(prepositions, "prepositions");

  std::set<std::string> noun_forms;
  for (const auto& p : nouns) {
    noun_forms.insert(p.singular);
    noun_forms.insert(p.plural);
  }
  for (const auto& d : determiners) {
    if (noun_forms.count(d))
      throw LexiconError("determiner '" + d + "' is also listed as a noun form");
  }

  lex.nouns = std::move(nouns);
  lex.verbs = std::move(verbs);
  lex.stative_verbs = std::move(stative_verbs);
  lex.determiners = std::move(determiners);
  lex.prepositions = std::move(prepositions);
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& manifest_path, const LexiconOptions& options) {
  std::ifstream mf(manifest_path);
  if (!mf) throw LexiconError("cannot open lexicon manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::parse_error& e) {
    throw LexiconError("lexicon manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();
  std::string shown;

  auto nouns_in = open_listed(base, manifest, "nouns", shown);
  auto nouns = parse_noun_pairs(nouns_in, shown);
  auto verbs_in = open_listed(base, manifest, "verbs", shown);
  auto verbs = parse_verb_pairs(verbs_in, shown, options);
  auto stative_in = open_listed(base, manifest, "stative_verbs", shown);
  auto stative = parse_verb_pairs(stative_in, shown, options);
  auto det_in = open_listed(base, manifest, "determiners", shown);
  auto dets = parse_word_list(det_in, shown);
  auto prep_in = open_listed(base, manifest, "prepositions", shown);
  auto preps = parse_word_list(prep_in, shown);

  return make_lexicon(std::move(nouns), std::move(verbs), std::move(stative), std::move(dets),
                      std::move(preps));
}

Lexicon filter_by_scorer_vocab(const Lexicon& lex, const std::unordered_set<std::string>& vocab,
                               bool include_nouns) {
  if (vocab.empty()) throw LexiconError("scorer vocabulary is empty");
  auto keep_verb = [&](const VerbPair& p) {
    return vocab.count(p.third_singular) && vocab.count(p.plural_base);
  };
  Lexicon out = lex;
  std::erase_if(out.verbs, [&](const VerbPair& p) { return !keep_verb(p); });
  std::erase_if(out.stative_verbs, [&](const VerbPair& p) { return !keep_verb(p); });
  if (include_nouns) {
    std::erase_if(out.nouns, [&](const NounPair& p) {
      return !(vocab.count(p.singular) && vocab.count(p.plural));
    });
  }
  if (out.verbs.empty())
    throw LexiconError("no verb pair has both forms in the scorer vocabulary");
  return out;
}

std::string lexicon_fingerprint(const Lexicon& lex) {
  std::uint64_t h = fnv1a64("sva-lexicon-v1");
  auto feed = [&h](std::string_view tag, std::string_view s) {
    h = fnv1a64(tag, h);
    h = fnv1a64(s, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  };
  for (const auto& p : lex.nouns) feed("N", p.singular + "," + p.plural);
  for (const auto& p : lex.verbs) feed("V", p.third_singular + "," + p.plural_base);
  for (const auto& p : lex.stative_verbs) feed("S", p.third_singular + "," + p.plural_base);
  for (const auto& w : lex.determiners) feed("D", w);
  for (const auto& w : lex.prepositions) feed("P", w);
  feed("C", lex.complementizer);
  feed("J", lex.conjunction);
  return hex64(h);
}

std::vector<std::string> all_forms(const Lexicon& lex) {
  std::set<std::string> forms;
  for (const auto& p : lex.nouns) forms.insert({p.singular, p.plural});
  for (const auto& p : lex.verbs) forms.insert({p.third_singular, p.plural_base});
  for (const auto& p : lex.stative_verbs) forms.insert({p.third_singular, p.plural_base});
  forms.insert(lex.determiners.begin(), lex.determiners.end());
  forms.insert(lex.prepositions.begin(), lex.prepositions.end());
  forms.insert(lex.complementizer);
  forms.insert(lex.conjunction);
  return {forms.begin(), forms.end()};
}

std::filesystem::path default_lexicon_manifest() {
  if (const char* env = std::getenv("SVA_LEXICON"); env && *env) return env;
  // The source tree copy wins while it exists; installed binaries fall back to the share dir.
  if (std::filesystem::exists(SVA_DEFAULT_LEXICON)) return SVA_DEFAULT_LEXICON;
  return SVA_INSTALLED_LEXICON;
}

}  // namespace sva
