#pragma once

#include <string>

#include "i3c/providers.hpp"

namespace i3c {

// Where the remote model lives. Chat and embeddings may use different
// hosts; paths are joined onto the base URL as-is.
struct HttpEndpointConfig {
  std::string base_url;            // e.g. "http://localhost:8080"
  std::string chat_path = "/v1/chat";
  std::string embed_path = "/v1/embed";
  std::string auth_token;          // sent as "Authorization: Bearer <token>"
  int timeout_seconds = 120;
};

// Wire format, chat:  POST {"model", "prompt", "temperature", "max_tokens"}
//                  -> {"text", "prompt_tokens", "completion_tokens"}
// Wire format, embed: POST {"texts": [...]} -> {"vectors": [[...], ...]}
// Connection problems raise TransportError; non-2xx statuses raise
// ProviderRefusalError carrying the response body verbatim.
ChatTransport make_http_chat_transport(const HttpEndpointConfig& config);
EmbedTransport make_http_embed_transport(const HttpEndpointConfig& config);

}  // namespace i3c
