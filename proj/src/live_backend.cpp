#include <chrono>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vcot/backends.hpp"
#include "vcot/error.hpp"

namespace vcot::agents {

using nlohmann::json;

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix, no trailing slash
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("backend base_url needs a scheme: '" + url + "'");
  auto slash = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("live backend needs base_url");
  if (config_.model.empty()) throw ConfigError("live backend needs a model name");
  split_url(config_.base_url);
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key) throw ConfigError("environment variable " + config_.api_key_env + " is not set");
    api_key_ = key;
  }
}

AgentResponse LiveBackend::complete(const AgentRequest& request) {
  auto ep = split_url(config_.base_url);
  json body{{"model", config_.model},
            {"temperature", config_.temperature},
            {"messages",
             json::array({{{"role", "system"}, {"content", request.system_prompt}},
                          {{"role", "user"}, {"content", request.user_prompt}}})}};
  auto payload = body.dump();

  httplib::Client client(ep.origin);
  client.set_connection_timeout(std::chrono::seconds(std::min(config_.timeout_seconds, 30)));
  client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
  client.set_write_timeout(std::chrono::seconds(config_.timeout_seconds));
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, config_.max_attempts); ++attempt) {
    if (attempt > 1) std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms * (attempt - 1)));
    auto res = client.Post(ep.path + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (retryable(res->status)) continue;
      break;
    }
    try {
      auto j = json::parse(res->body);
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw BackendError("response content is not text");
      return {content.get<std::string>()};
    } catch (const json::exception& e) {
      throw BackendError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw BackendError(std::string(to_string(request.kind)) + " call to " + ep.origin + " failed: " + last_error);
}

}  // namespace vcot::agents
