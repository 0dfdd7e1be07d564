#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "vcot/agents.hpp"

namespace vcot::agents {

/// CRLF to LF, trailing whitespace stripped per line, trailing blank lines dropped.
std::string normalize_prompt(std::string_view prompt);

/// Stable cassette key: SHA-256 over the agent kind and the normalized
/// system and user prompts.
std::string request_key(const AgentRequest& request);

struct CassetteRecord {
  std::string key;
  std::string request_digest;  // short human-readable label, not used for lookup
  std::string response_text;
};

std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path);

/// Answers from recorded cassettes (a .jsonl file or a directory of them).
/// A request with no recording is a BackendError.
class ReplayBackend : public AgentBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& path);
  AgentResponse complete(const AgentRequest& request) override;
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, std::string> records_;
  mutable std::mutex mutex_;
};

/// Forwards to another backend and appends every exchange to a cassette.
class RecordingBackend : public AgentBackend {
 public:
  RecordingBackend(AgentBackend& inner, std::filesystem::path cassette);
  AgentResponse complete(const AgentRequest& request) override;

 private:
  AgentBackend& inner_;
  std::filesystem::path path_;
  std::map<std::string, bool> written_;
  std::mutex mutex_;
};

/// Canned answers for tests. Responses are looked up by "kind:tag" then by
/// "kind" and consumed in order; the last one repeats once the list runs out.
class ScriptedBackend : public AgentBackend {
 public:
  ScriptedBackend() = default;
  ScriptedBackend(std::initializer_list<std::pair<std::string, std::vector<std::string>>> script);
  /// JSON object: {"transformer": ["...", ...], "checker:lemma": [...], ...}.
  static std::unique_ptr<ScriptedBackend> from_json_file(const std::filesystem::path& path);

  void add(const std::string& key, std::string response);
  AgentResponse complete(const AgentRequest& request) override;

  std::vector<AgentRequest> requests() const;
  std::size_t calls(const std::string& key) const;

 private:
  std::map<std::string, std::vector<std::string>> script_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<AgentRequest> seen_;
  mutable std::mutex mutex_;
};

struct LiveConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string model;
  std::string api_key_env;  // name of the variable holding the key
  double temperature = 0.0;
  int timeout_seconds = 300;
  int max_attempts = 3;
  int backoff_ms = 1000;
};

/// OpenAI-style `POST {base_url}/chat/completions` client.
class LiveBackend : public AgentBackend {
 public:
  explicit LiveBackend(LiveConfig config);
  AgentResponse complete(const AgentRequest& request) override;

 private:
  LiveConfig config_;
  std::string api_key_;
};

}  // namespace vcot::agents
