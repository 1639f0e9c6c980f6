#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sva/dictionary.hpp"
#include "sva/stimulus.hpp"
#include "sva/template.hpp"

namespace sva {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Document {
  std::string id;
  std::string text;
};

/// Whitespace tokens with trailing '.', '?' and '!' split off as their own tokens.
std::vector<std::string> tokenize(std::string_view text);
bool is_sentence_terminal(std::string_view token) noexcept;

/// One document per blank-line separated block. `<doc ...>` / `</doc>` lines written by
/// extractor tools act as block separators.
std::vector<Document> split_documents(std::string_view text, std::string_view base_id);

/// Every regular file under `dir`, in path order.
std::vector<Document> read_corpus_dir(const std::filesystem::path& dir);

struct MatchRecord {
  Stimulus stimulus;
  std::string document_id;
  /// Index of the span's first token within the document's token stream.
  std::size_t token_offset = 0;

  bool operator==(const MatchRecord&) const = default;
};

struct ScanLimits {
  std::optional<std::size_t> default_cap;
  std::map<std::string, std::size_t> per_template;

  std::optional<std::size_t> cap_for(std::string_view template_id) const;
};

/// Tries `t` on tokens[offset, offset + t.size()). Tokens must not contain a sentence
/// terminal inside the span. Returns the first reading in index order that satisfies
/// every slot category, fixed form and agreement link.
std::optional<Stimulus> match_at(std::span<const std::string> tokens, std::size_t offset,
                                 const Template& t, const DictionaryIndex& idx);

/// Single left-to-right pass over every sentence of every document. For each template,
/// a match blocks later matches of the same template that would overlap it. Records
/// come out in (document, offset, template order) order; caps keep the first records.
/// Documents are scanned in parallel when jobs > 1 with identical output.
std::vector<MatchRecord> scan(std::span<const Document> docs, const std::vector<Template>& templates,
                              const DictionaryIndex& idx, const ScanLimits& limits = {},
                              unsigned jobs = 1);

/// True if `s` re-parses against `t` with its recorded cue/attractor numbers and verb pair.
bool conforms(const Stimulus& s, const Template& t, const DictionaryIndex& idx);

struct HarvestOptions {
  /// Return fewer than n items instead of failing.
  bool truncate = false;
  /// Take n/2 singular-cue and n/2 plural-cue records.
  bool balance = false;
};

/// First n records of `template_id` in scan order, as a WIKI dataset.
Dataset harvest(std::span<const MatchRecord> records, std::string_view template_id, std::size_t n,
                const HarvestOptions& options = {});

/// Same selection as harvest(), returning the records themselves.
std::vector<MatchRecord> select_records(std::span<const MatchRecord> records,
                                        std::string_view template_id, std::size_t n,
                                        const HarvestOptions& options = {});

/// Provenance sidecar: one {"index", "document_id", "token_offset"} object per line.
void write_provenance(std::ostream& out, std::span<const MatchRecord> records);

}  // namespace sva
