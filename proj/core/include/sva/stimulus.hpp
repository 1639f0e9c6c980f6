#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sva/number.hpp"

namespace sva {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Source { NONCE, WIKI, ML };

std::string_view to_string(Source s) noexcept;
Source parse_source(std::string_view s);

/// One minimal pair. `tokens[target_index]` holds the correct form; the incorrect form
/// is the opposite-number form of the same verb.
struct Stimulus {
  std::vector<std::string> tokens;
  std::string template_id;
  std::size_t cue_index = 0;
  Number cue_number = Number::Singular;
  std::size_t target_index = 0;
  std::string correct_form;
  std::string incorrect_form;
  std::optional<std::size_t> attractor_index;
  std::optional<Number> attractor_number;
  Source source = Source::NONCE;
  std::string seed_trace;

  /// Empty when there is no attractor.
  std::optional<bool> attractor_congruent() const {
    if (!attractor_number) return std::nullopt;
    return *attractor_number == cue_number;
  }
  std::string sentence() const;

  bool operator==(const Stimulus&) const = default;
};

/// Throws DataError if the stimulus is internally inconsistent.
void check_stimulus(const Stimulus& s);

struct Dataset {
  std::string template_id;
  Source source = Source::NONCE;
  std::uint64_t generation_seed = 0;
  std::vector<Stimulus> items;

  std::size_t count(Number cue) const;
  bool operator==(const Dataset&) const = default;
};

/// Sidecar metadata stored next to a JSONL dataset as `<file>.meta.json`.
struct DatasetHeader {
  std::string template_id;
  Source source = Source::NONCE;
  std::uint64_t seed = 0;
  std::string lexicon_hash;
  std::string generator_version;
  std::size_t count = 0;
};

nlohmann::json to_json(const Stimulus& s);
Stimulus stimulus_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetHeader& h);
DatasetHeader header_from_json(const nlohmann::json& j);

void write_jsonl(std::ostream& out, const Dataset& d);
/// Reads items only; template/source come from the first item when present.
Dataset read_jsonl(std::istream& in, std::string_view source_name = "<stream>");

std::string to_jsonl(const Dataset& d);

std::filesystem::path sidecar_path(const std::filesystem::path& data_file);

/// Writes `<path>` and its `.meta.json` sidecar.
void save_dataset(const std::filesystem::path& path, const Dataset& d, const DatasetHeader& header);
/// Loads items and, if present, the sidecar (seed and ids are taken from it).
Dataset load_dataset(const std::filesystem::path& path);

std::string generator_version();

}  // namespace sva
