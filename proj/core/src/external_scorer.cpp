#include "sva/external_scorer.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace sva {
namespace {

constexpr std::size_t kStdioChunk = 16;
constexpr std::size_t kVocabChunk = 200;

void check_responses(std::span<const ScoreRequest> batch, const std::vector<ScoreResponse>& out) {
  if (out.size() != batch.size())
    throw ScorerTransportError("scorer returned " + std::to_string(out.size()) + " responses for " +
                               std::to_string(batch.size()) + " requests");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].id != batch[i].id)
      throw ScorerTransportError("scorer response id '" + out[i].id + "' does not match request '" +
                                 batch[i].id + "'");
  }
}

ScoreResponse parse_response(const nlohmann::json& j) {
  try {
    return response_from_json(j);
  } catch (const std::exception& e) {
    throw ScorerTransportError(std::string("malformed scorer response: ") + e.what());
  }
}

std::vector<bool> membership(const nlohmann::json& map, std::span<const std::string> words) {
  std::vector<bool> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto it = map.find(w);
    out.push_back(it != map.end() && it->is_boolean() && it->get<bool>());
  }
  return out;
}

}  // namespace

StdioScorer::StdioScorer(std::string command) : command_(std::move(command)) {
  // A dead child must surface as EPIPE, not kill the harness.
  std::signal(SIGPIPE, SIG_IGN);
  spawn();
  try {
    handshake();
  } catch (const std::exception& e) {
    shutdown();
    throw ScorerHandshakeError("scorer '" + command_ + "' failed the handshake: " + e.what());
  }
}

StdioScorer::~StdioScorer() { shutdown(); }

void StdioScorer::spawn() {
  int in_pipe[2], out_pipe[2];
  if (pipe(in_pipe) != 0) throw ScorerTransportError(std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw ScorerTransportError(std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) throw ScorerTransportError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void StdioScorer::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
  }
  pid_ = -1;
}

void StdioScorer::write_line(const std::string& line) {
  std::string data = line + '\n';
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + done, data.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ScorerTransportError(std::string("write to scorer: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::string StdioScorer::read_line() {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ScorerTransportError("scorer closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void StdioScorer::handshake() {
  write_line(R"({"op":"vocab"})");
  const auto reply = nlohmann::json::parse(read_line());
  if (!reply.is_object()) throw ScorerTransportError("handshake reply is not a JSON object");
  if (reply.contains("vocab_hash") && reply["vocab_hash"].is_string())
    vocab_hash_ = reply["vocab_hash"].get<std::string>();
}

std::vector<ScoreResponse> StdioScorer::score(std::span<const ScoreRequest> batch) {
  std::lock_guard lock(mu_);
  if (pid_ < 0) {
    spawn();
    handshake();
  }
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  try {
    for (std::size_t lo = 0; lo < batch.size(); lo += kStdioChunk) {
      const std::size_t hi = std::min(batch.size(), lo + kStdioChunk);
      for (std::size_t i = lo; i < hi; ++i) write_line(to_json(batch[i]).dump());
      for (std::size_t i = lo; i < hi; ++i) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(read_line());
        } catch (const nlohmann::json::parse_error& e) {
          throw ScorerTransportError(std::string("scorer sent invalid JSON: ") + e.what());
        }
        out.push_back(parse_response(j));
      }
    }
  } catch (const ScorerTransportError&) {
    shutdown();
    throw;
  }
  check_responses(batch, out);
  return out;
}

std::optional<std::vector<bool>> StdioScorer::contains(std::span<const std::string> words) {
  if (!vocab_hash_) return std::nullopt;
  std::lock_guard lock(mu_);
  if (pid_ < 0) {
    spawn();
    handshake();
  }
  std::vector<bool> out;
  out.reserve(words.size());
  for (std::size_t lo = 0; lo < words.size(); lo += kVocabChunk) {
    const auto part = words.subspan(lo, std::min(kVocabChunk, words.size() - lo));
    nlohmann::json req{{"op", "vocab"}, {"words", std::vector<std::string>(part.begin(), part.end())}};
    write_line(req.dump());
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(read_line());
    } catch (const nlohmann::json::parse_error& e) {
      throw ScorerTransportError(std::string("scorer sent invalid JSON: ") + e.what());
    }
    const auto& c = reply.contains("contains") ? reply["contains"] : nlohmann::json();
    if (c.is_object()) {
      auto m = membership(c, part);
      out.insert(out.end(), m.begin(), m.end());
    } else if (c.is_array() && c.size() == part.size()) {
      for (const auto& b : c) out.push_back(b.is_boolean() && b.get<bool>());
    } else {
      throw ScorerTransportError("vocabulary reply lacks a 'contains' map");
    }
  }
  return out;
}

HttpScorer::HttpScorer(std::string base_url) : base_url_(std::move(base_url)) {
  if (base_url_.starts_with("https://"))
    throw ScorerHandshakeError("https scorers are not supported; use http://");
  // Split "http://host:port/prefix" into the client address and a path prefix.
  const auto host_start = base_url_.find("://") + 3;
  const auto slash = base_url_.find('/', host_start);
  std::string host = base_url_;
  if (slash != std::string::npos) {
    host = base_url_.substr(0, slash);
    prefix_ = base_url_.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }
  base_url_ = host;

  httplib::Client cli(base_url_);
  cli.set_connection_timeout(5);
  auto res = cli.Get(prefix_ + "/health");
  if (!res) throw ScorerHandshakeError("no answer from " + base_url_ + prefix_ + "/health");
  if (res->status != 200)
    throw ScorerHandshakeError(base_url_ + prefix_ + "/health returned " + std::to_string(res->status));
  auto health = nlohmann::json::parse(res->body, nullptr, false);
  if (health.is_object() && health.contains("max_concurrency") &&
      health["max_concurrency"].is_number_unsigned())
    max_concurrency_ = std::max(1u, health["max_concurrency"].get<unsigned>());
}

std::vector<ScoreResponse> HttpScorer::score(std::span<const ScoreRequest> batch) {
  nlohmann::json body{{"requests", nlohmann::json::array()}};
  for (const auto& r : batch) body["requests"].push_back(to_json(r));
  httplib::Client cli(base_url_);
  cli.set_read_timeout(300);
  auto res = cli.Post(prefix_ + "/score", body.dump(), "application/json");
  if (!res) throw ScorerTransportError("POST /score failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ScorerTransportError("POST /score returned " + std::to_string(res->status));
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("responses") || !reply["responses"].is_array())
    throw ScorerTransportError("POST /score reply lacks a 'responses' array");
  std::vector<ScoreResponse> out;
  out.reserve(batch.size());
  for (const auto& j : reply["responses"]) out.push_back(parse_response(j));
  check_responses(batch, out);
  return out;
}

std::optional<std::vector<bool>> HttpScorer::contains(std::span<const std::string> words) {
  if (!has_vocab_) return std::nullopt;
  httplib::Client cli(base_url_);
  std::vector<bool> out;
  out.reserve(words.size());
  for (std::size_t lo = 0; lo < words.size(); lo += kVocabChunk) {
    const auto part = words.subspan(lo, std::min(kVocabChunk, words.size() - lo));
    std::string joined;
    for (const auto& w : part) {
      if (!joined.empty()) joined.push_back(',');
      joined += w;
    }
    auto res = cli.Get(prefix_ + "/vocab", httplib::Params{{"words", joined}}, httplib::Headers{});
    if (!res) throw ScorerTransportError("GET /vocab failed: " + httplib::to_string(res.error()));
    if (res->status == 404) {
      has_vocab_ = false;
      return std::nullopt;
    }
    if (res->status != 200) throw ScorerTransportError("GET /vocab returned " + std::to_string(res->status));
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (!reply.is_object()) throw ScorerTransportError("GET /vocab reply is not an object");
    auto m = membership(reply, part);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

}  // namespace sva
