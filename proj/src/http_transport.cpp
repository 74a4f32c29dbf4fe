#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <thread>

#include "gecjudge/llm_backend.hpp"

namespace gecjudge::llm {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) {
    throw Error(ErrorCode::InvalidArgument, "malformed endpoint URL '" + url + "'", "endpoint");
  }
  return Endpoint{m[1].str(), m[2].matched ? m[2].str() : "/"};
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

HttpChatTransport::HttpChatTransport(BackendConfig config) : config_(std::move(config)) {
  split_url(config_.endpoint_url);
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
  const Endpoint endpoint = split_url(config_.endpoint_url);

  httplib::Headers headers;
  if (!config_.api_key_env_var.empty()) {
    const char* key = std::getenv(config_.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw Error(ErrorCode::TransportError,
                  "environment variable " + config_.api_key_env_var + " is not set",
                  config_.api_key_env_var);
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  Json body;
  body["model"] = config_.model_name;
  body["temperature"] = request.temperature;
  body["messages"] = Json::array();
  if (!request.prompt.system.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", request.prompt.system}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", request.prompt.user}});
  const std::string payload = body.dump();

  httplib::Client client(endpoint.origin);
  const auto timeout = config_.request_timeout;
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                static_cast<time_t>((timeout.count() % 1000) * 1000));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          static_cast<time_t>((timeout.count() % 1000) * 1000));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                           static_cast<time_t>((timeout.count() % 1000) * 1000));

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * (1 << (attempt - 1)));

    auto result = client.Post(endpoint.path, headers, payload, "application/json");
    if (!result) {
      last_error = "request failed: " + httplib::to_string(result.error());
      continue;
    }
    if (retryable_status(result->status)) {
      last_error = "server answered HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw Error(ErrorCode::TransportError,
                  "server answered HTTP " + std::to_string(result->status) + ": " + result->body);
    }
    try {
      const Json reply = Json::parse(result->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  std::string("chat response lacks choices[0].message.content: ") + e.what());
    }
  }
  throw Error(ErrorCode::TransportError, last_error + " (after " +
                                             std::to_string(config_.max_retries) + " retries)");
}

}  // namespace gecjudge::llm
