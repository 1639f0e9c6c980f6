#include <fstream>
#include <istream>
#include <sstream>

#include "sva/corpus.hpp"
#include "sva/dictionary.hpp"
#include "sva/eval.hpp"
#include "sva/util.hpp"

namespace sva {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string part;
  while (std::getline(ss, part, '\t')) out.push_back(part);
  return out;
}

void strip_terminals(std::vector<std::string>& tokens) {
  while (!tokens.empty() && is_sentence_terminal(tokens.back())) tokens.pop_back();
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Number agreed with by `form`, given its minimal-pair partner.
std::optional<Number> verb_number(const std::string& form, const std::string& other,
                                  const DictionaryIndex* idx) {
  if (idx) {
    for (const Reading& r : idx->lookup(form))
      if (is_verb(r.category) && idx->form(r.category, r.id, opposite(*r.number)) == fold_case(other))
        return r.number;
  }
  const std::string f = fold_case(form), o = fold_case(other);
  static const std::pair<const char*, const char*> irregular[] = {
      {"is", "are"}, {"was", "were"}, {"has", "have"}, {"does", "do"}};
  for (const auto& [sg, pl] : irregular) {
    if (f == sg && o == pl) return Number::Singular;
    if (f == pl && o == sg) return Number::Plural;
  }
  if (f == o + "s" || f == o + "es" || (ends_with(o, "y") && f == o.substr(0, o.size() - 1) + "ies"))
    return Number::Singular;
  if (o == f + "s" || o == f + "es" || (ends_with(f, "y") && o == f.substr(0, f.size() - 1) + "ies"))
    return Number::Plural;
  return std::nullopt;
}

std::optional<Number> noun_number(const std::string& form, const DictionaryIndex* idx) {
  if (idx) {
    for (const Reading& r : idx->lookup(form))
      if (r.category == Category::Noun) return r.number;
  }
  const std::string f = fold_case(form);
  if (ends_with(f, "ss") || ends_with(f, "us") || ends_with(f, "is")) return Number::Singular;
  return ends_with(f, "s") ? Number::Plural : Number::Singular;
}

}  // namespace

std::map<std::string, Dataset> import_ml(std::istream& in, const std::vector<Template>& templates,
                                         const Lexicon* lex, std::string_view source_name) {
  std::optional<DictionaryIndex> idx;
  if (lex) idx.emplace(*lex);
  const DictionaryIndex* ip = idx ? &*idx : nullptr;

  std::map<std::string, Dataset> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no) + ": ";

    const auto cols = split_tabs(line);
    if (cols.size() < 3 || cols.size() > 4)
      throw EvalError(where + "expected TEMPLATE<tab>GRAMMATICAL<tab>UNGRAMMATICAL[<tab>CUE_INDEX]");
    const Template* t = find_template(templates, cols[0]);
    if (!t) throw EvalError(where + "unknown template label '" + cols[0] + "'");

    auto good = tokenize(cols[1]);
    auto bad = tokenize(cols[2]);
    std::vector<std::string> trailing;
    while (!good.empty() && is_sentence_terminal(good.back())) {
      trailing.insert(trailing.begin(), good.back());
      good.pop_back();
    }
    strip_terminals(bad);
    if (good.size() != bad.size()) throw EvalError(where + "the two sentences have different lengths");
    std::vector<std::size_t> diff;
    for (std::size_t i = 0; i < good.size(); ++i)
      if (fold_case(good[i]) != fold_case(bad[i])) diff.push_back(i);
    if (diff.empty()) throw EvalError(where + "the two sentences are identical");
    if (diff.size() > 1) throw EvalError(where + "the sentences differ at " + std::to_string(diff.size()) + " positions");

    Stimulus s;
    s.template_id = t->id;
    s.target_index = diff.front();
    s.correct_form = good[s.target_index];
    s.incorrect_form = bad[s.target_index];
    const bool aligned = good.size() == t->size();
    if (cols.size() == 4) {
      try {
        s.cue_index = std::stoul(cols[3]);
      } catch (const std::exception&) {
        throw EvalError(where + "bad cue index '" + cols[3] + "'");
      }
    } else if (aligned) {
      s.cue_index = t->cue_index();
    } else {
      throw EvalError(where + "sentence length does not match template " + t->id + "; give a CUE_INDEX column");
    }
    if (s.cue_index >= s.target_index) throw EvalError(where + "cue must precede the target");
    const auto n = verb_number(s.correct_form, s.incorrect_form, ip);
    if (!n) throw EvalError(where + "cannot tell the number of '" + s.correct_form + "'/'" + s.incorrect_form + "'");
    s.cue_number = *n;
    if (aligned && s.target_index == t->target_index()) {
      if (auto a = t->attractor_index()) {
        s.attractor_index = *a;
        s.attractor_number = noun_number(good[*a], ip);
      }
    }
    s.tokens = std::move(good);
    s.tokens.insert(s.tokens.end(), trailing.begin(), trailing.end());
    s.source = Source::ML;
    s.seed_trace = "ml:" + std::string(source_name) + ":" + std::to_string(line_no);
    check_stimulus(s);

    Dataset& d = out[t->id];
    d.template_id = t->id;
    d.source = Source::ML;
    d.items.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, Dataset> import_ml(const std::filesystem::path& path,
                                         const std::vector<Template>& templates, const Lexicon* lex) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open " + path.string());
  return import_ml(in, templates, lex, path.filename().string());
}

}  // namespace sva
