#include "sva/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sva/util.hpp"

namespace sva {
namespace {

bool is_terminal_char(char c) { return c == '.' || c == '?' || c == '!'; }

// Readings and folded forms for one sentence, computed once and shared by all templates.
struct SentenceView {
  std::span<const std::string> surface;
  std::vector<std::string> folded;
  std::vector<std::span<const Reading>> readings;
  std::vector<std::uint8_t> masks;

  SentenceView(std::span<const std::string> tokens, const DictionaryIndex& idx) : surface(tokens) {
    folded.reserve(tokens.size());
    readings.reserve(tokens.size());
    masks.reserve(tokens.size());
    for (const auto& tok : tokens) {
      folded.push_back(fold_case(tok));
      readings.push_back(idx.lookup(folded.back()));
      masks.push_back(idx.category_mask(folded.back()));
    }
  }
};

// Depth-first search over per-token readings in index order. `accept` sees a complete
// assignment and may reject it, in which case the search continues.
class SpanSearch {
 public:
  SpanSearch(const SentenceView& view, std::size_t offset, const Template& t)
      : view_(view), offset_(offset), t_(t), chosen_(t.size(), nullptr) {}

  bool prefilter() const {
    if (offset_ + t_.size() > view_.surface.size()) return false;
    for (const Slot& s : t_.slots) {
      const std::size_t k = offset_ + s.index;
      if (s.fixed_form) {
        if (view_.folded[k] != *s.fixed_form) return false;
      } else if (!(view_.masks[k] & category_bit(s.category))) {
        return false;
      }
    }
    return true;
  }

  template <class Accept>
  bool run(Accept&& accept) {
    return prefilter() && step(0, accept);
  }

  const std::vector<const Reading*>& chosen() const { return chosen_; }

 private:
  bool consistent(std::size_t k, const Reading& r) const {
    const Slot& s = t_.slots[k];
    if (s.agrees_with && *s.agrees_with < k) {
      const Reading* ctl = chosen_[*s.agrees_with];
      if (ctl->number != r.number) return false;
    }
    // Verbs placed before their controller are checked once the controller is chosen.
    for (std::size_t j = 0; j < k; ++j) {
      const Slot& v = t_.slots[j];
      if (v.agrees_with == k && chosen_[j]->number != r.number) return false;
    }
    return true;
  }

  template <class Accept>
  bool step(std::size_t k, Accept& accept) {
    if (k == t_.size()) return accept(chosen_);
    const Slot& s = t_.slots[k];
    for (const Reading& r : view_.readings[offset_ + k]) {
      if (r.category != s.category) continue;
      if (!consistent(k, r)) continue;
      chosen_[k] = &r;
      if (step(k + 1, accept)) return true;
    }
    chosen_[k] = nullptr;
    return false;
  }

  const SentenceView& view_;
  std::size_t offset_;
  const Template& t_;
  std::vector<const Reading*> chosen_;
};

Stimulus build_stimulus(const SentenceView& view, std::size_t offset, const Template& t,
                        const std::vector<const Reading*>& chosen, const DictionaryIndex& idx) {
  Stimulus s;
  s.tokens.assign(view.surface.begin() + static_cast<std::ptrdiff_t>(offset),
                  view.surface.begin() + static_cast<std::ptrdiff_t>(offset + t.size()));
  s.template_id = t.id;
  s.cue_index = t.cue_index();
  s.cue_number = chosen[s.cue_index]->number.value();
  s.target_index = t.target_index();
  const Reading& target = *chosen[s.target_index];
  s.correct_form = s.tokens[s.target_index];
  s.incorrect_form = idx.form(target.category, target.id, opposite(s.cue_number));
  if (auto a = t.attractor_index()) {
    s.attractor_index = *a;
    s.attractor_number = chosen[*a]->number;
  }
  s.source = Source::WIKI;
  return s;
}

struct DocTokens {
  std::vector<std::string> tokens;
  // [begin, end) of each sentence, excluding the terminal token.
  std::vector<std::pair<std::size_t, std::size_t>> sentences;
};

DocTokens segment(std::string_view text) {
  DocTokens d;
  d.tokens = tokenize(text);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < d.tokens.size(); ++i) {
    if (is_sentence_terminal(d.tokens[i])) {
      if (i > begin) d.sentences.emplace_back(begin, i);
      begin = i + 1;
    }
  }
  if (begin < d.tokens.size()) d.sentences.emplace_back(begin, d.tokens.size());
  return d;
}

std::vector<MatchRecord> scan_document(const Document& doc, const std::vector<Template>& templates,
                                       const std::vector<std::optional<std::size_t>>& caps,
                                       const DictionaryIndex& idx) {
  std::vector<MatchRecord> out;
  std::vector<std::size_t> found(templates.size(), 0);
  const DocTokens d = segment(doc.text);
  const std::span<const std::string> all(d.tokens);
  for (const auto& [begin, end] : d.sentences) {
    const SentenceView view(all.subspan(begin, end - begin), idx);
    std::vector<std::size_t> next_free(templates.size(), 0);
    const std::size_t len = end - begin;
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t ti = 0; ti < templates.size(); ++ti) {
        const Template& t = templates[ti];
        if (i < next_free[ti] || i + t.size() > len) continue;
        if (caps[ti] && found[ti] >= *caps[ti]) continue;
        SpanSearch search(view, i, t);
        if (!search.run([](const auto&) { return true; })) continue;
        MatchRecord rec;
        rec.stimulus = build_stimulus(view, i, t, search.chosen(), idx);
        // A span that closes its sentence keeps the terminal punctuation.
        if (i + t.size() == len && end < d.tokens.size())
          rec.stimulus.tokens.push_back(d.tokens[end]);
        rec.document_id = doc.id;
        rec.token_offset = begin + i;
        rec.stimulus.seed_trace = "wiki:" + doc.id + ":" + std::to_string(rec.token_offset);
        out.push_back(std::move(rec));
        next_free[ti] = i + t.size();
        ++found[ti];
      }
    }
  }
  return out;
}

}  // namespace

bool is_sentence_terminal(std::string_view token) noexcept {
  return !token.empty() && std::all_of(token.begin(), token.end(), is_terminal_char);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    std::string_view word = text.substr(i, j - i);
    std::size_t cut = word.size();
    while (cut > 0 && is_terminal_char(word[cut - 1])) --cut;
    if (cut > 0) out.emplace_back(word.substr(0, cut));
    for (std::size_t k = cut; k < word.size(); ++k) out.emplace_back(1, word[k]);
    i = j;
  }
  return out;
}

std::vector<Document> split_documents(std::string_view text, std::string_view base_id) {
  std::vector<Document> docs;
  std::string current;
  auto flush = [&] {
    if (current.find_first_not_of(" \t\r\n") != std::string::npos)
      docs.push_back({std::string(base_id) + "#" + std::to_string(docs.size()), current});
    current.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    const bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
    const bool doc_tag = line.starts_with("<doc") || line.starts_with("</doc>");
    if (blank || doc_tag) {
      flush();
    } else {
      current.append(line);
      current.push_back('\n');
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  flush();
  return docs;
}

std::vector<Document> read_corpus_dir(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::exists(dir)) throw CorpusError("corpus path " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  if (fs::is_regular_file(dir)) {
    files.push_back(dir);
  } else {
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  }
  std::vector<Document> docs;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw CorpusError("cannot read " + f.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string rel =
        fs::is_regular_file(dir) ? f.filename().string() : fs::relative(f, dir).generic_string();
    auto part = split_documents(buf.str(), rel);
    std::move(part.begin(), part.end(), std::back_inserter(docs));
  }
  return docs;
}

std::optional<std::size_t> ScanLimits::cap_for(std::string_view template_id) const {
  const std::string key = normalize_template_id(template_id);
  for (const auto& [id, cap] : per_template)
    if (normalize_template_id(id) == key) return cap;
  return default_cap;
}

std::optional<Stimulus> match_at(std::span<const std::string> tokens, std::size_t offset,
                                 const Template& t, const DictionaryIndex& idx) {
  if (offset + t.size() > tokens.size()) return std::nullopt;
  const SentenceView view(tokens, idx);
  SpanSearch search(view, offset, t);
  if (!search.run([](const auto&) { return true; })) return std::nullopt;
  return build_stimulus(view, offset, t, search.chosen(), idx);
}

std::vector<MatchRecord> scan(std::span<const Document> docs, const std::vector<Template>& templates,
                              const DictionaryIndex& idx, const ScanLimits& limits, unsigned jobs) {
  std::vector<std::optional<std::size_t>> caps;
  for (const auto& t : templates) caps.push_back(limits.cap_for(t.id));
  const bool capped = std::all_of(caps.begin(), caps.end(), [](const auto& c) { return c.has_value(); });

  std::vector<MatchRecord> out;
  std::vector<std::size_t> taken(templates.size(), 0);
  auto saturated = [&] {
    if (!capped) return false;
    for (std::size_t i = 0; i < templates.size(); ++i)
      if (taken[i] < *caps[i]) return false;
    return true;
  };

  // Batches keep memory bounded and allow an early stop once every cap is met.
  const std::size_t batch = std::max<std::size_t>(64, std::size_t{16} * std::max(1u, jobs));
  for (std::size_t lo = 0; lo < docs.size() && !saturated(); lo += batch) {
    const std::size_t hi = std::min(docs.size(), lo + batch);
    std::vector<std::vector<MatchRecord>> shard(hi - lo);
    parallel_for(hi - lo, jobs,
                 [&](std::size_t k) { shard[k] = scan_document(docs[lo + k], templates, caps, idx); });
    for (auto& recs : shard) {
      for (auto& r : recs) {
        std::size_t ti = 0;
        while (templates[ti].id != r.stimulus.template_id) ++ti;
        if (caps[ti] && taken[ti] >= *caps[ti]) continue;
        ++taken[ti];
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

bool conforms(const Stimulus& s, const Template& t, const DictionaryIndex& idx) {
  std::size_t len = s.tokens.size();
  if (len == t.size() + 1 && is_sentence_terminal(s.tokens.back())) --len;
  if (len != t.size()) return false;
  if (s.cue_index != t.cue_index() || s.target_index != t.target_index()) return false;
  if (s.attractor_index != t.attractor_index()) return false;
  const SentenceView view(std::span<const std::string>(s.tokens).first(len), idx);
  SpanSearch search(view, 0, t);
  return search.run([&](const std::vector<const Reading*>& chosen) {
    if (chosen[s.cue_index]->number != s.cue_number) return false;
    if (s.attractor_index && chosen[*s.attractor_index]->number != s.attractor_number) return false;
    const Reading& target = *chosen[s.target_index];
    return fold_case(s.incorrect_form) ==
           idx.form(target.category, target.id, opposite(s.cue_number));
  });
}

std::vector<MatchRecord> select_records(std::span<const MatchRecord> records,
                                        std::string_view template_id, std::size_t n,
                                        const HarvestOptions& options) {
  if (options.balance && n % 2 != 0)
    throw CorpusError("balanced harvest needs an even item count");
  const std::string key = normalize_template_id(template_id);
  std::vector<MatchRecord> out;
  std::size_t per_number[2] = {0, 0};
  for (const auto& r : records) {
    if (out.size() == n) break;
    if (normalize_template_id(r.stimulus.template_id) != key) continue;
    if (options.balance) {
      auto& c = per_number[static_cast<int>(r.stimulus.cue_number)];
      if (c == n / 2) continue;
      ++c;
    }
    out.push_back(r);
  }
  if (out.size() < n && !options.truncate)
    throw CorpusError("only " + std::to_string(out.size()) + " matches for template " +
                      std::string(template_id) + ", " + std::to_string(n) + " requested");
  return out;
}

Dataset harvest(std::span<const MatchRecord> records, std::string_view template_id, std::size_t n,
                const HarvestOptions& options) {
  Dataset d;
  d.template_id = std::string(template_id);
  if (const Template* t = find_template(builtin_templates(), template_id)) d.template_id = t->id;
  d.source = Source::WIKI;
  for (auto& r : select_records(records, template_id, n, options)) d.items.push_back(std::move(r.stimulus));
  if (!d.items.empty()) d.template_id = d.items.front().template_id;
  return d;
}

void write_provenance(std::ostream& out, std::span<const MatchRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    nlohmann::ordered_json j;
    j["index"] = i;
    j["document_id"] = records[i].document_id;
    j["token_offset"] = records[i].token_offset;
    out << j.dump() << '\n';
  }
}

}  // namespace sva
