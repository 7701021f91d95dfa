#include "i3c/http_transport.hpp"

#include <chrono>
#include <memory>

#include <httplib.h>
#include <json.hpp>

namespace i3c {

using nlohmann::json;

namespace {

std::shared_ptr<httplib::Client> make_client(const HttpEndpointConfig& config) {
  auto client = std::make_shared<httplib::Client>(config.base_url);
  client->set_connection_timeout(config.timeout_seconds, 0);
  client->set_read_timeout(config.timeout_seconds, 0);
  client->set_write_timeout(config.timeout_seconds, 0);
  if (!config.auth_token.empty()) {
    client->set_default_headers(
        {{"Authorization", "Bearer " + config.auth_token}});
  }
  return client;
}

json post_json(httplib::Client& client, const std::string& path,
               const json& body) {
  auto started = std::chrono::steady_clock::now();
  auto result = client.Post(path, body.dump(), "application/json");
  if (!result) {
    throw TransportError("POST " + path + " failed: " +
                         httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw ProviderRefusalError(result->status, result->body);
  }
  json parsed;
  try {
    parsed = json::parse(result->body);
  } catch (const json::exception& e) {
    throw TransportError("POST " + path + ": response is not JSON: " +
                         e.what());
  }
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  parsed["__elapsed_ms"] = static_cast<long>(elapsed.count());
  return parsed;
}

}  // namespace

ChatTransport make_http_chat_transport(const HttpEndpointConfig& config) {
  auto client = make_client(config);
  std::string path = config.chat_path;
  return [client, path](const CompletionRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["prompt"] = request.prompt;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    json reply = post_json(*client, path, body);
    CompletionResponse response;
    try {
      response.text = reply.at("text").get<std::string>();
      response.prompt_tokens = reply.value("prompt_tokens", 0L);
      response.completion_tokens = reply.value("completion_tokens", 0L);
    } catch (const json::exception& e) {
      throw TransportError(std::string("chat response missing fields: ") +
                           e.what());
    }
    response.latency_ms = reply.value("__elapsed_ms", 0L);
    return response;
  };
}

EmbedTransport make_http_embed_transport(const HttpEndpointConfig& config) {
  auto client = make_client(config);
  std::string path = config.embed_path;
  return [client, path](const std::vector<std::string>& texts) {
    json body;
    body["texts"] = texts;
    json reply = post_json(*client, path, body);
    try {
      return reply.at("vectors").get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      throw TransportError(std::string("embed response missing fields: ") +
                           e.what());
    }
  };
}

}  // namespace i3c
