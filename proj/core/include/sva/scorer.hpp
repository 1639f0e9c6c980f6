#pragma once

#include <array>
#include <climits>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sva/dictionary.hpp"
#include "sva/stimulus.hpp"

namespace sva {

inline constexpr std::string_view kMaskToken = "[MASK]";

/// The masked sentence and the two candidate forms. By convention the correct form
/// comes first; scorers must not rely on that.
struct ScoreRequest {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t mask_index = 0;
  std::array<std::string, 2> candidates;

  bool operator==(const ScoreRequest&) const = default;
};

/// Higher is better; only the comparison between the two scores matters. A scorer that
/// cannot handle a request (e.g. a candidate outside its vocabulary) sets `error`.
struct ScoreResponse {
  std::string id;
  std::array<double, 2> scores{};
  std::optional<std::string> error;

  bool operator==(const ScoreResponse&) const = default;
};

nlohmann::json to_json(const ScoreRequest& r);
ScoreRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScoreResponse& r);
ScoreResponse response_from_json(const nlohmann::json& j);

/// Builds the request for one stimulus: target replaced by the mask token.
ScoreRequest make_request(const Stimulus& s, std::string id);

/// Thrown for failures of the channel to a scorer (broken pipe, HTTP error, bad JSON).
/// The harness retries these.
class ScorerTransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::string name() const = 0;

  /// One response per request, in request order.
  virtual std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) = 0;

  /// Membership of each word in the scorer's vocabulary, or nullopt if the scorer has
  /// no closed vocabulary.
  virtual std::optional<std::vector<bool>> contains(std::span<const std::string> words) {
    (void)words;
    return std::nullopt;
  }

  /// Called with the dataset about to be scored, before any score() call for it.
  virtual void prepare(const Dataset& d) { (void)d; }

  /// Upper bound on concurrent score() calls the scorer accepts.
  virtual unsigned max_concurrency() const { return UINT_MAX; }
};

/// Reads the stored correct form from the dataset passed to prepare().
class OracleScorer final : public Scorer {
 public:
  std::string name() const override { return "oracle"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;
  void prepare(const Dataset& d) override;

 private:
  std::vector<std::string> correct_;
};

class UniformScorer final : public Scorer {
 public:
  std::string name() const override { return "uniform"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;
};

/// Seeded pseudo-random preference, a pure function of the request content.
class CoinFlipScorer final : public Scorer {
 public:
  explicit CoinFlipScorer(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "coinflip:" + std::to_string(seed_); }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;

 private:
  std::uint64_t seed_;
};

/// Agrees the verb with the closest noun to the left of the mask. Falls back to equal
/// scores when no noun precedes the mask or the candidates' numbers are unknown.
class LinearProximityScorer final : public Scorer {
 public:
  explicit LinearProximityScorer(const Lexicon& lex);
  std::string name() const override { return "linear-proximity"; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;

 private:
  std::optional<Number> noun_number(const std::string& token) const;
  std::optional<Number> verb_number(const std::string& token) const;

  std::unordered_map<std::string, Number> nouns_;
  std::unordered_map<std::string, Number> verbs_;
};

/// Builds a scorer from a spec string:
///   oracle | uniform | coinflip[:SEED] | linear-proximity
///   stdio:COMMAND        external process speaking the line protocol
///   http://HOST:PORT     external HTTP service
/// `lex` is required for linear-proximity. Throws std::invalid_argument for unknown specs.
std::unique_ptr<Scorer> make_scorer(std::string_view spec, const Lexicon* lex);

}  // namespace sva
