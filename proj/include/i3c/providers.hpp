#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "i3c/errors.hpp"
#include "i3c/relevance.hpp"

namespace i3c {

enum class StoreMode { Record, Replay, Passthrough };

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.7;
  int max_tokens = 512;
  std::string model_id;
  // Distinguishes repeated draws of the same prompt (self-consistency).
  int sample_index = 0;
};

struct CompletionResponse {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  long latency_ms = 0;
  bool cached = false;  // came from the store rather than the wire
};

// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(std::string_view data);

// Request digests: SHA-256 over a canonical JSON encoding (sorted keys,
// no whitespace) of every field that affects the response. Store entries
// are keyed by these.
std::string chat_request_digest(const CompletionRequest& request);
std::string embed_request_digest(const std::string& text);

// Append-only JSONL store of request/response pairs, one object per
// line: {"digest", "kind", "request", "response"}. Loaded fully on open;
// writes go straight to disk.
class ReplayStore {
 public:
  explicit ReplayStore(std::filesystem::path path);

  std::optional<CompletionResponse> find_chat(const std::string& digest) const;
  std::optional<std::vector<double>> find_embedding(
      const std::string& digest) const;

  void put_chat(const std::string& digest, const CompletionRequest& request,
                const CompletionResponse& response);
  void put_embedding(const std::string& digest, const std::string& text,
                     const std::vector<double>& vector);

  size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, CompletionResponse> chat_;
  std::unordered_map<std::string, std::vector<double>> embeddings_;
};

using ChatTransport = std::function<CompletionResponse(const CompletionRequest&)>;
using EmbedTransport =
    std::function<std::vector<std::vector<double>>(const std::vector<std::string>&)>;

struct ProviderLimits {
  int max_in_flight = 4;           // concurrent transport calls
  double requests_per_second = 0;  // 0 disables rate limiting
  int max_attempts = 3;            // per request, transport errors only
  int backoff_initial_ms = 100;    // doubles after each failed attempt
};

// Front door for all remote calls. Depending on the mode, requests are
// served from the store, forwarded and recorded, or just forwarded.
// Transport failures are retried with exponential backoff; refusals
// (non-2xx) are not.
class Provider {
 public:
  Provider(StoreMode mode, std::shared_ptr<ReplayStore> store,
           ChatTransport chat, EmbedTransport embed, size_t embedding_dim,
           ProviderLimits limits = {});

  CompletionResponse complete(const CompletionRequest& request);
  EmbeddingVector embed(const std::string& text);
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts);

  StoreMode mode() const { return mode_; }
  size_t embedding_dim() const { return embedding_dim_; }

  // Number of chat completions / embedding texts served, cached or not.
  long chat_calls() const { return chat_calls_.load(); }
  long embed_calls() const { return embed_calls_.load(); }

 private:
  CompletionResponse transport_complete(const CompletionRequest& request);
  std::vector<std::vector<double>> transport_embed(
      const std::vector<std::string>& texts);
  void check_vector(const std::vector<double>& v) const;
  void throttle();

  template <typename Fn>
  auto with_retry(Fn&& fn) -> decltype(fn());

  StoreMode mode_;
  std::shared_ptr<ReplayStore> store_;
  ChatTransport chat_;
  EmbedTransport embed_;
  size_t embedding_dim_;
  ProviderLimits limits_;

  std::atomic<long> chat_calls_{0};
  std::atomic<long> embed_calls_{0};

  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  int in_flight_ = 0;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace i3c
