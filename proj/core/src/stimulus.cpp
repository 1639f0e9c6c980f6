#include "sva/stimulus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sva/util.hpp"

namespace sva {
namespace {

std::string stimulus_line(const Stimulus& s);

}  // namespace

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::NONCE: return "NONCE";
    case Source::WIKI: return "WIKI";
    case Source::ML: return "ML";
  }
  return "?";
}

Source parse_source(std::string_view s) {
  const std::string f = fold_case(s);
  if (f == "nonce") return Source::NONCE;
  if (f == "wiki") return Source::WIKI;
  if (f == "ml") return Source::ML;
  throw DataError("unknown source '" + std::string(s) + "'");
}

std::string Stimulus::sentence() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

void check_stimulus(const Stimulus& s) {
  auto fail = [&](const std::string& m) {
    throw DataError("stimulus '" + s.sentence() + "': " + m);
  };
  if (s.target_index >= s.tokens.size()) fail("target_index out of range");
  if (s.cue_index >= s.tokens.size()) fail("cue_index out of range");
  if (s.tokens[s.target_index] != s.correct_form) fail("target token differs from correct_form");
  if (fold_case(s.correct_form) == fold_case(s.incorrect_form)) fail("correct and incorrect forms coincide");
  if (s.attractor_index.has_value() != s.attractor_number.has_value())
    fail("attractor index and number must be given together");
  if (s.attractor_index && *s.attractor_index >= s.tokens.size()) fail("attractor_index out of range");
}

std::size_t Dataset::count(Number cue) const {
  std::size_t n = 0;
  for (const auto& s : items) n += s.cue_number == cue;
  return n;
}

nlohmann::json to_json(const Stimulus& s) {
  return nlohmann::json::parse(stimulus_line(s));
}

namespace {

std::string stimulus_line(const Stimulus& s) {
  nlohmann::ordered_json j;
  j["tokens"] = s.tokens;
  j["template_id"] = s.template_id;
  j["cue_index"] = s.cue_index;
  j["cue_number"] = to_string(s.cue_number);
  j["target_index"] = s.target_index;
  j["correct_form"] = s.correct_form;
  j["incorrect_form"] = s.incorrect_form;
  j["attractor_index"] = s.attractor_index ? nlohmann::ordered_json(*s.attractor_index) : nlohmann::ordered_json();
  j["attractor_number"] = s.attractor_number ? nlohmann::ordered_json(to_string(*s.attractor_number)) : nlohmann::ordered_json();
  j["source"] = to_string(s.source);
  j["seed_trace"] = s.seed_trace;
  return j.dump();
}

}  // namespace

Stimulus stimulus_from_json(const nlohmann::json& j) {
  try {
    Stimulus s;
    s.tokens = j.at("tokens").get<std::vector<std::string>>();
    s.template_id = j.at("template_id").get<std::string>();
    s.cue_index = j.at("cue_index").get<std::size_t>();
    s.cue_number = parse_number(j.at("cue_number").get<std::string>());
    s.target_index = j.at("target_index").get<std::size_t>();
    s.correct_form = j.at("correct_form").get<std::string>();
    s.incorrect_form = j.at("incorrect_form").get<std::string>();
    if (j.contains("attractor_index") && !j["attractor_index"].is_null())
      s.attractor_index = j["attractor_index"].get<std::size_t>();
    if (j.contains("attractor_number") && !j["attractor_number"].is_null())
      s.attractor_number = parse_number(j["attractor_number"].get<std::string>());
    s.source = parse_source(j.at("source").get<std::string>());
    s.seed_trace = j.value("seed_trace", "");
    check_stimulus(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed stimulus: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed stimulus: ") + e.what());
  }
}

nlohmann::json to_json(const DatasetHeader& h) {
  return {{"template_id", h.template_id},
          {"source", to_string(h.source)},
          {"seed", h.seed},
          {"lexicon_hash", h.lexicon_hash},
          {"generator_version", h.generator_version},
          {"count", h.count}};
}

DatasetHeader header_from_json(const nlohmann::json& j) {
  DatasetHeader h;
  h.template_id = j.at("template_id").get<std::string>();
  h.source = parse_source(j.at("source").get<std::string>());
  h.seed = j.value("seed", std::uint64_t{0});
  h.lexicon_hash = j.value("lexicon_hash", "");
  h.generator_version = j.value("generator_version", "");
  h.count = j.value("count", std::size_t{0});
  return h;
}

void write_jsonl(std::ostream& out, const Dataset& d) {
  for (const auto& s : d.items) out << stimulus_line(s) << '\n';
}

std::string to_jsonl(const Dataset& d) {
  std::ostringstream os;
  write_jsonl(os, d);
  return os.str();
}

Dataset read_jsonl(std::istream& in, std::string_view source_name) {
  Dataset d;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      d.items.push_back(stimulus_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string(source_name) + ":" + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(source_name) + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  if (!d.items.empty()) {
    d.template_id = d.items.front().template_id;
    d.source = d.items.front().source;
  }
  return d;
}

std::filesystem::path sidecar_path(const std::filesystem::path& data_file) {
  auto p = data_file;
  p += ".meta.json";
  return p;
}

void save_dataset(const std::filesystem::path& path, const Dataset& d, const DatasetHeader& header) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_jsonl(out, d);
  }
  std::ofstream meta(sidecar_path(path), std::ios::binary);
  if (!meta) throw DataError("cannot write " + sidecar_path(path).string());
  meta << to_json(header).dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Dataset d = read_jsonl(in, path.filename().string());
  if (std::ifstream meta(sidecar_path(path)); meta) {
    try {
      const DatasetHeader h = header_from_json(nlohmann::json::parse(meta));
      d.template_id = h.template_id;
      d.source = h.source;
      d.generation_seed = h.seed;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(sidecar_path(path).string() + ": " + e.what());
    }
  }
  return d;
}

std::string generator_version() { return "sva-generator/" SVA_VERSION; }

}  // namespace sva
