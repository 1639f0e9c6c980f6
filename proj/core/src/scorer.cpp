#include "sva/scorer.hpp"

#include <charconv>

#include <nlohmann/json.hpp>

#include "sva/external_scorer.hpp"
#include "sva/util.hpp"

namespace sva {

nlohmann::json to_json(const ScoreRequest& r) {
  return {{"id", r.id},
          {"tokens", r.tokens},
          {"mask_index", r.mask_index},
          {"candidates", {r.candidates[0], r.candidates[1]}}};
}

ScoreRequest request_from_json(const nlohmann::json& j) {
  ScoreRequest r;
  r.id = j.at("id").get<std::string>();
  r.tokens = j.at("tokens").get<std::vector<std::string>>();
  r.mask_index = j.at("mask_index").get<std::size_t>();
  const auto& c = j.at("candidates");
  if (!c.is_array() || c.size() != 2) throw std::invalid_argument("candidates must hold two forms");
  r.candidates = {c[0].get<std::string>(), c[1].get<std::string>()};
  if (r.mask_index >= r.tokens.size()) throw std::invalid_argument("mask_index out of range");
  if (r.candidates[0] == r.candidates[1]) throw std::invalid_argument("candidates must differ");
  return r;
}

nlohmann::json to_json(const ScoreResponse& r) {
  nlohmann::json j{{"id", r.id}};
  if (r.error) {
    j["error"] = *r.error;
  } else {
    j["scores"] = {r.scores[0], r.scores[1]};
  }
  return j;
}

ScoreResponse response_from_json(const nlohmann::json& j) {
  ScoreResponse r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("error") && !j["error"].is_null()) {
    r.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return r;
  }
  const auto& s = j.at("scores");
  if (!s.is_array() || s.size() != 2) throw std::invalid_argument("scores must hold two numbers");
  for (int i = 0; i < 2; ++i) {
    if (!s[i].is_number()) throw std::invalid_argument("non-numeric score");
    r.scores[i] = s[i].get<double>();
  }
  return r;
}

ScoreRequest make_request(const Stimulus& s, std::string id) {
  ScoreRequest r;
  r.id = std::move(id);
  r.tokens = s.tokens;
  r.tokens[s.target_index] = std::string(kMaskToken);
  r.mask_index = s.target_index;
  r.candidates = {s.correct_form, s.incorrect_form};
  return r;
}

namespace {

std::size_t parse_item_id(const std::string& id) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
  if (ec != std::errc() || p != id.data() + id.size())
    throw std::invalid_argument("oracle scorer: request id '" + id + "' is not an item index");
  return v;
}

}  // namespace

void OracleScorer::prepare(const Dataset& d) {
  correct_.clear();
  correct_.reserve(d.items.size());
  for (const auto& s : d.items) correct_.push_back(s.correct_form);
}

std::vector<ScoreResponse> OracleScorer::score(std::span<const ScoreRequest> batch) {
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) {
    const std::size_t i = parse_item_id(r.id);
    if (i >= correct_.size()) throw std::out_of_range("oracle scorer: unknown item " + r.id);
    ScoreResponse resp{r.id, {0.0, 0.0}, std::nullopt};
    for (int c = 0; c < 2; ++c) resp.scores[c] = r.candidates[c] == correct_[i] ? 1.0 : 0.0;
    out.push_back(std::move(resp));
  }
  return out;
}

std::vector<ScoreResponse> UniformScorer::score(std::span<const ScoreRequest> batch) {
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back({r.id, {0.5, 0.5}, std::nullopt});
  return out;
}

std::vector<ScoreResponse> CoinFlipScorer::score(std::span<const ScoreRequest> batch) {
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) {
    std::uint64_t h = fnv1a64(std::to_string(r.mask_index));
    for (const auto& t : r.tokens) h = fnv1a64(t + '\x1f', h);
    // Order-independent in the candidates, so the flip does not track the correct-first slot.
    const std::uint64_t a = rng::mix(seed_, h, fnv1a64(r.candidates[0]));
    const std::uint64_t b = rng::mix(seed_, h, fnv1a64(r.candidates[1]));
    out.push_back({r.id, {static_cast<double>(a >> 11), static_cast<double>(b >> 11)}, std::nullopt});
  }
  return out;
}

LinearProximityScorer::LinearProximityScorer(const Lexicon& lex) {
  for (const auto& p : lex.nouns) {
    nouns_.emplace(p.singular, Number::Singular);
    nouns_.emplace(p.plural, Number::Plural);
  }
  for (const auto* verbs : {&lex.verbs, &lex.stative_verbs}) {
    for (const auto& p : *verbs) {
      verbs_.emplace(p.third_singular, Number::Singular);
      verbs_.emplace(p.plural_base, Number::Plural);
    }
  }
}

std::optional<Number> LinearProximityScorer::noun_number(const std::string& token) const {
  auto it = nouns_.find(fold_case(token));
  if (it == nouns_.end()) return std::nullopt;
  return it->second;
}

std::optional<Number> LinearProximityScorer::verb_number(const std::string& token) const {
  auto it = verbs_.find(fold_case(token));
  if (it == verbs_.end()) return std::nullopt;
  return it->second;
}

std::vector<ScoreResponse> LinearProximityScorer::score(std::span<const ScoreRequest> batch) {
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  for (const auto& r : batch) {
    ScoreResponse resp{r.id, {0.5, 0.5}, std::nullopt};
    std::optional<Number> nearest;
    for (std::size_t i = r.mask_index; i-- > 0 && !nearest;) nearest = noun_number(r.tokens[i]);
    const auto n0 = verb_number(r.candidates[0]);
    const auto n1 = verb_number(r.candidates[1]);
    if (nearest && n0 && n1 && *n0 != *n1) {
      resp.scores[0] = *n0 == *nearest ? 1.0 : 0.0;
      resp.scores[1] = *n1 == *nearest ? 1.0 : 0.0;
    }
    out.push_back(std::move(resp));
  }
  return out;
}

std::unique_ptr<Scorer> make_scorer(std::string_view spec, const Lexicon* lex) {
  if (spec == "oracle") return std::make_unique<OracleScorer>();
  if (spec == "uniform") return std::make_unique<UniformScorer>();
  if (spec == "coinflip") return std::make_unique<CoinFlipScorer>(0);
  if (spec.starts_with("coinflip:")) {
    const auto digits = spec.substr(9);
    std::uint64_t seed = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec != std::errc() || p != digits.data() + digits.size())
      throw std::invalid_argument("bad coinflip seed in '" + std::string(spec) + "'");
    return std::make_unique<CoinFlipScorer>(seed);
  }
  if (spec == "linear-proximity") {
    if (!lex) throw std::invalid_argument("linear-proximity scorer needs a lexicon");
    return std::make_unique<LinearProximityScorer>(*lex);
  }
  if (spec.starts_with("stdio:")) return std::make_unique<StdioScorer>(std::string(spec.substr(6)));
  if (spec.starts_with("http://") || spec.starts_with("https://"))
    return std::make_unique<HttpScorer>(std::string(spec));
  throw std::invalid_argument("unknown scorer '" + std::string(spec) + "'");
}

}  // namespace sva
