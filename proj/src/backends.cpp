#include "vcot/backends.hpp"

#include <algorithm>
#include <fstream>
#include "json.hpp"

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::agents {

using nlohmann::json;

std::string normalize_prompt(std::string_view prompt) {
  std::string out;
  for (auto line : split_lines(prompt)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.remove_suffix(1);
    out.append(line);
    out += '\n';
  }
  while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
  if (out == "\n") out.clear();
  return out;
}

std::string request_key(const AgentRequest& request) {
  std::string material(to_string(request.kind));
  material += '\n';
  material += normalize_prompt(request.system_prompt);
  material += "\n\x1f\n";
  material += normalize_prompt(request.user_prompt);
  return sha256_hex(material);
}

namespace {

std::string digest_label(const AgentRequest& request) {
  std::string label(to_string(request.kind));
  if (!request.tag.empty()) label += ":" + request.tag;
  label += " " + sha256_hex(normalize_prompt(request.user_prompt)).substr(0, 12);
  return label;
}

}  // namespace

std::vector<CassetteRecord> load_cassette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("cannot open cassette " + path.string());
  std::vector<CassetteRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      out.push_back({j.at("key").get<std::string>(), j.value("request_digest", ""), j.at("response_text").get<std::string>()});
    } catch (const json::exception& e) {
      throw BackendError(path.string() + ":" + std::to_string(n) + ": bad cassette record: " + e.what());
    }
  }
  return out;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files)
    for (auto& r : load_cassette(f)) records_.emplace(std::move(r.key), std::move(r.response_text));
}

AgentResponse ReplayBackend::complete(const AgentRequest& request) {
  auto key = request_key(request);
  std::lock_guard lock(mutex_);
  auto it = records_.find(key);
  if (it == records_.end()) throw BackendError("no recorded response for " + digest_label(request) + " (key " + key + ")");
  return {it->second};
}

RecordingBackend::RecordingBackend(AgentBackend& inner, std::filesystem::path cassette)
    : inner_(inner), path_(std::move(cassette)) {
  if (std::filesystem::exists(path_))
    for (const auto& r : load_cassette(path_)) written_[r.key] = true;
  else if (path_.has_parent_path())
    std::filesystem::create_directories(path_.parent_path());
}

AgentResponse RecordingBackend::complete(const AgentRequest& request) {
  auto response = inner_.complete(request);
  auto key = request_key(request);
  std::lock_guard lock(mutex_);
  if (!written_[key]) {
    std::ofstream out(path_, std::ios::app);
    json j{{"key", key}, {"request_digest", digest_label(request)}, {"response_text", response.text}};
    out << j.dump() << '\n';
    if (!out) throw BackendError("cannot append to cassette " + path_.string());
    written_[key] = true;
  }
  return response;
}

ScriptedBackend::ScriptedBackend(std::initializer_list<std::pair<std::string, std::vector<std::string>>> script) {
  for (const auto& [key, responses] : script)
    for (const auto& r : responses) script_[key].push_back(r);
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::from_json_file(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("bad script " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("script " + path.string() + " must be a JSON object");
  auto b = std::make_unique<ScriptedBackend>();
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      b->add(key, value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& v : value) b->add(key, v.get<std::string>());
    } else {
      throw ConfigError("script entry '" + key + "' must be a string or a list of strings");
    }
  }
  return b;
}

void ScriptedBackend::add(const std::string& key, std::string response) {
  std::lock_guard lock(mutex_);
  script_[key].push_back(std::move(response));
}

AgentResponse ScriptedBackend::complete(const AgentRequest& request) {
  std::lock_guard lock(mutex_);
  seen_.push_back(request);
  std::string kind(to_string(request.kind));
  std::string key = request.tag.empty() ? kind : kind + ":" + request.tag;
  auto it = script_.find(key);
  if (it == script_.end()) {
    key = kind;
    it = script_.find(key);
  }
  if (it == script_.end() || it->second.empty()) throw BackendError("script has no response for " + key);
  auto& i = cursor_[key];
  const auto& text = it->second[std::min(i, it->second.size() - 1)];
  ++i;
  return {text};
}

std::vector<AgentRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

std::size_t ScriptedBackend::calls(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = cursor_.find(key);
  return it == cursor_.end() ? 0 : it->second;
}

}  // namespace vcot::agents
