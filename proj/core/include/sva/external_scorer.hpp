#pragma once

#include <mutex>
#include <optional>
#include <string>

#include "sva/scorer.hpp"

namespace sva {

/// The external scorer did not answer the initial handshake.
class ScorerHandshakeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Child process speaking newline-delimited JSON on stdin/stdout:
///   -> {"id": str, "tokens": [str], "mask_index": int, "candidates": [str, str]}
///   <- {"id": str, "scores": [float, float]}        (or {"id": str, "error": str})
/// plus the vocabulary handshake {"op": "vocab", "words": [...]} ->
///   {"vocab_hash": str, "contains": {word: bool}}.
/// A child that dies is restarted on the next call.
class StdioScorer final : public Scorer {
 public:
  explicit StdioScorer(std::string command);
  ~StdioScorer() override;
  StdioScorer(const StdioScorer&) = delete;
  StdioScorer& operator=(const StdioScorer&) = delete;

  std::string name() const override { return "stdio:" + command_; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;
  std::optional<std::vector<bool>> contains(std::span<const std::string> words) override;
  unsigned max_concurrency() const override { return 1; }

  const std::optional<std::string>& vocab_hash() const { return vocab_hash_; }

 private:
  void spawn();
  void shutdown();
  void handshake();
  void write_line(const std::string& line);
  std::string read_line();

  std::string command_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<std::string> vocab_hash_;
  std::mutex mu_;
};

/// HTTP service: POST /score {"requests": [...]} -> {"responses": [...]},
/// GET /vocab?words=a,b -> {"a": bool, ...}, GET /health.
class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(std::string base_url);

  std::string name() const override { return base_url_; }
  std::vector<ScoreResponse> score(std::span<const ScoreRequest> batch) override;
  std::optional<std::vector<bool>> contains(std::span<const std::string> words) override;
  unsigned max_concurrency() const override { return max_concurrency_; }

 private:
  std::string base_url_;
  std::string prefix_;
  unsigned max_concurrency_ = 4;
  bool has_vocab_ = true;
};

}  // namespace sva
