#include "i3c/providers.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <thread>
#include <utility>

#include <json.hpp>

namespace i3c {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char hash[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(),
         hash);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * SHA256_DIGEST_LENGTH);
  for (unsigned char byte : hash) {
    out.push_back(hex[byte >> 4]);
    out.push_back(hex[byte & 0x0f]);
  }
  return out;
}

namespace {

// json objects keep their keys sorted, so dump() is already canonical
// as long as we never rely on insertion order.
json chat_request_json(const CompletionRequest& r) {
  json j;
  j["max_tokens"] = r.max_tokens;
  j["model"] = r.model_id;
  j["prompt"] = r.prompt;
  j["sample_index"] = r.sample_index;
  j["temperature"] = r.temperature;
  return j;
}

json chat_response_json(const CompletionResponse& r) {
  json j;
  j["completion_tokens"] = r.completion_tokens;
  j["latency_ms"] = r.latency_ms;
  j["prompt_tokens"] = r.prompt_tokens;
  j["text"] = r.text;
  return j;
}

CompletionResponse chat_response_from_json(const json& j) {
  CompletionResponse r;
  r.text = j.at("text").get<std::string>();
  r.prompt_tokens = j.at("prompt_tokens").get<long>();
  r.completion_tokens = j.at("completion_tokens").get<long>();
  r.latency_ms = j.value("latency_ms", 0L);
  return r;
}

}  // namespace

std::string chat_request_digest(const CompletionRequest& request) {
  json j = chat_request_json(request);
  j["kind"] = "chat";
  return sha256_hex(j.dump());
}

std::string embed_request_digest(const std::string& text) {
  json j;
  j["kind"] = "embed";
  j["text"] = text;
  return sha256_hex(j.dump());
}

ReplayStore::ReplayStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in.is_open()) return;  // fresh store
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError("store " + path_.string() + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
    try {
      std::string digest = j.at("digest").get<std::string>();
      std::string kind = j.at("kind").get<std::string>();
      if (kind == "chat") {
        chat_[digest] = chat_response_from_json(j.at("response"));
      } else if (kind == "embed") {
        embeddings_[digest] =
            j.at("response").at("vector").get<std::vector<double>>();
      } else {
        throw ParseError("store " + path_.string() + " line " +
                         std::to_string(line_no) + ": unknown kind " + kind);
      }
    } catch (const json::exception& e) {
      throw ParseError("store " + path_.string() + " line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::optional<CompletionResponse> ReplayStore::find_chat(
    const std::string& digest) const {
  std::shared_lock lock(mutex_);
  auto it = chat_.find(digest);
  if (it == chat_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::vector<double>> ReplayStore::find_embedding(
    const std::string& digest) const {
  std::shared_lock lock(mutex_);
  auto it = embeddings_.find(digest);
  if (it == embeddings_.end()) return std::nullopt;
  return it->second;
}

void ReplayStore::put_chat(const std::string& digest,
                           const CompletionRequest& request,
                           const CompletionResponse& response) {
  std::unique_lock lock(mutex_);
  if (chat_.contains(digest)) return;
  json j;
  j["digest"] = digest;
  j["kind"] = "chat";
  j["request"] = chat_request_json(request);
  j["response"] = chat_response_json(response);
  std::ofstream out(path_, std::ios::app);
  if (!out.is_open()) {
    throw Error("cannot write store file " + path_.string());
  }
  out << j.dump() << "\n";
  chat_[digest] = response;
}

void ReplayStore::put_embedding(const std::string& digest,
                                const std::string& text,
                                const std::vector<double>& vector) {
  std::unique_lock lock(mutex_);
  if (embeddings_.contains(digest)) return;
  json j;
  j["digest"] = digest;
  j["kind"] = "embed";
  j["request"] = json{{"text", text}};
  j["response"] = json{{"vector", vector}};
  std::ofstream out(path_, std::ios::app);
  if (!out.is_open()) {
    throw Error("cannot write store file " + path_.string());
  }
  out << j.dump() << "\n";
  embeddings_[digest] = vector;
}

size_t ReplayStore::size() const {
  std::shared_lock lock(mutex_);
  return chat_.size() + embeddings_.size();
}

Provider::Provider(StoreMode mode, std::shared_ptr<ReplayStore> store,
                   ChatTransport chat, EmbedTransport embed,
                   size_t embedding_dim, ProviderLimits limits)
    : mode_(mode),
      store_(std::move(store)),
      chat_(std::move(chat)),
      embed_(std::move(embed)),
      embedding_dim_(embedding_dim),
      limits_(limits) {
  if (mode_ != StoreMode::Passthrough && !store_) {
    throw Error("record and replay modes need a store");
  }
}

void Provider::throttle() {
  if (limits_.requests_per_second <= 0) return;
  auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / limits_.requests_per_second));
  std::chrono::steady_clock::time_point slot;
  {
    std::unique_lock lock(gate_mutex_);
    auto now = std::chrono::steady_clock::now();
    if (next_slot_ < now) next_slot_ = now;
    slot = next_slot_;
    next_slot_ += interval;
  }
  std::this_thread::sleep_until(slot);
}

namespace {

class InFlightGate {
 public:
  InFlightGate(std::mutex& m, std::condition_variable& cv, int& count,
               int limit)
      : mutex_(m), cv_(cv), count_(count) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return count_ < limit; });
    ++count_;
  }
  ~InFlightGate() {
    {
      std::lock_guard lock(mutex_);
      --count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex& mutex_;
  std::condition_variable& cv_;
  int& count_;
};

}  // namespace

template <typename Fn>
auto Provider::with_retry(Fn&& fn) -> decltype(fn()) {
  int backoff_ms = limits_.backoff_initial_ms;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError&) {
      if (attempt >= limits_.max_attempts) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
  }
}

CompletionResponse Provider::transport_complete(
    const CompletionRequest& request) {
  if (!chat_) throw TransportError("no chat transport configured");
  return with_retry([&] {
    throttle();
    InFlightGate gate(gate_mutex_, gate_cv_, in_flight_,
                      limits_.max_in_flight);
    return chat_(request);
  });
}

std::vector<std::vector<double>> Provider::transport_embed(
    const std::vector<std::string>& texts) {
  if (!embed_) throw TransportError("no embedding transport configured");
  auto vectors = with_retry([&] {
    throttle();
    InFlightGate gate(gate_mutex_, gate_cv_, in_flight_,
                      limits_.max_in_flight);
    return embed_(texts);
  });
  if (vectors.size() != texts.size()) {
    throw TransportError("embedding endpoint returned " +
                         std::to_string(vectors.size()) + " vectors for " +
                         std::to_string(texts.size()) + " texts");
  }
  return vectors;
}

void Provider::check_vector(const std::vector<double>& v) const {
  if (v.size() != embedding_dim_) {
    throw DimensionMismatchError(
        "embedding has dimension " + std::to_string(v.size()) + ", expected " +
        std::to_string(embedding_dim_));
  }
  bool all_zero = true;
  for (double x : v) {
    if (x != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) throw ZeroVectorError("embedding is all zeros");
}

CompletionResponse Provider::complete(const CompletionRequest& request) {
  chat_calls_.fetch_add(1);
  const std::string digest = chat_request_digest(request);
  if (mode_ != StoreMode::Passthrough) {
    if (auto hit = store_->find_chat(digest)) {
      hit->cached = true;
      return *hit;
    }
    if (mode_ == StoreMode::Replay) throw ReplayMissError(digest);
  }
  CompletionResponse response = transport_complete(request);
  if (mode_ == StoreMode::Record) {
    store_->put_chat(digest, request, response);
  }
  return response;
}

EmbeddingVector Provider::embed(const std::string& text) {
  auto batch = embed_batch({text});
  return std::move(batch.front());
}

std::vector<EmbeddingVector> Provider::embed_batch(
    const std::vector<std::string>& texts) {
  embed_calls_.fetch_add(static_cast<long>(texts.size()));
  std::vector<std::optional<std::vector<double>>> found(texts.size());
  std::vector<std::string> digests(texts.size());
  std::vector<size_t> missing;
  for (size_t i = 0; i < texts.size(); ++i) {
    digests[i] = embed_request_digest(texts[i]);
    if (mode_ != StoreMode::Passthrough) {
      found[i] = store_->find_embedding(digests[i]);
    }
    if (!found[i]) missing.push_back(i);
  }
  if (!missing.empty() && mode_ == StoreMode::Replay) {
    throw ReplayMissError(digests[missing.front()]);
  }
  if (!missing.empty()) {
    std::vector<std::string> to_fetch;
    to_fetch.reserve(missing.size());
    for (size_t i : missing) to_fetch.push_back(texts[i]);
    auto vectors = transport_embed(to_fetch);
    for (size_t k = 0; k < missing.size(); ++k) {
      size_t i = missing[k];
      check_vector(vectors[k]);
      if (mode_ == StoreMode::Record) {
        store_->put_embedding(digests[i], texts[i], vectors[k]);
      }
      found[i] = std::move(vectors[k]);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    check_vector(*found[i]);
    out.push_back(EmbeddingVector{std::move(*found[i])});
  }
  return out;
}

}  // namespace i3c
