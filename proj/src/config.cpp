#include "vcot/config.hpp"

#include <cstdlib>
#include <set>

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::config {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(BackendMode m) {
  switch (m) {
    case BackendMode::Live: return "live";
    case BackendMode::Replay: return "replay";
    case BackendMode::Scripted: return "scripted";
  }
  return "?";
}

std::optional<std::string> process_env(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

BackendMode parse_mode(const std::string& s) {
  for (auto m : {BackendMode::Live, BackendMode::Replay, BackendMode::Scripted})
    if (to_string(m) == s) return m;
  throw ConfigError("backend.mode must be live, replay or scripted, not '" + s + "'");
}

void validate_backend(const BackendSettings& b) {
  switch (b.mode) {
    case BackendMode::Live:
      if (b.live.base_url.empty() || b.live.model.empty() || b.live.api_key_env.empty())
        throw ConfigError("live backend needs base_url, model and api_key_env");
      if (b.live.timeout_seconds <= 0 || b.live.max_attempts <= 0) throw ConfigError("live backend limits must be positive");
      break;
    case BackendMode::Replay:
      if (b.cassette_dir.empty()) throw ConfigError("replay backend needs cassette_dir");
      break;
    case BackendMode::Scripted:
      if (b.script.empty()) throw ConfigError("scripted backend needs script");
      break;
  }
}

void apply_env(ToolConfig& c, const fs::path& cwd, const EnvLookup& env) {
  if (auto v = env("VCOT_VERUS_BIN")) c.verus.binary = *v;
  if (auto v = env("VCOT_OUTPUT_ROOT")) c.output_root = resolve(cwd, *v);

  auto mode = env("VCOT_BACKEND_MODE");
  bool touched = mode.has_value();
  for (const char* name : {"VCOT_BASE_URL", "VCOT_MODEL", "VCOT_API_KEY_ENV", "VCOT_CASSETTE_DIR", "VCOT_SCRIPT"})
    touched |= env(name).has_value();
  if (!touched) return;
  if (!c.backend) {
    if (!mode) throw ConfigError("backend environment overrides need VCOT_BACKEND_MODE when no backend is configured");
    c.backend = BackendSettings{};
  }
  auto& b = *c.backend;
  if (mode) b.mode = parse_mode(*mode);
  if (auto v = env("VCOT_BASE_URL")) b.live.base_url = *v;
  if (auto v = env("VCOT_MODEL")) b.live.model = *v;
  if (auto v = env("VCOT_API_KEY_ENV")) b.live.api_key_env = *v;
  if (auto v = env("VCOT_CASSETTE_DIR")) b.cassette_dir = resolve(cwd, *v);
  if (auto v = env("VCOT_SCRIPT")) b.script = resolve(cwd, *v);
  validate_backend(b);
}

}  // namespace

ToolConfig parse_config(const json& j, const fs::path& base_dir, const EnvLookup& env) {
  check_keys(j, "config", {"verus", "backend", "lift", "suite", "output_root"});
  ToolConfig c;

  if (j.contains("verus")) {
    const auto& v = j["verus"];
    check_keys(v, "verus", {"binary", "timeout_seconds", "extra_args"});
    auto bin = get<std::string>(v, "binary", "verus", "");
    // A bare name is looked up on PATH; anything with a slash is a path.
    c.verus.binary = bin.find('/') == std::string::npos ? bin : resolve(base_dir, bin).string();
    c.verus.timeout_seconds = get<int>(v, "timeout_seconds", "verus", c.verus.timeout_seconds);
    c.verus.extra_args = get<std::vector<std::string>>(v, "extra_args", "verus", {});
    if (c.verus.timeout_seconds <= 0) throw ConfigError("verus.timeout_seconds must be positive");
  }
  c.lift.verus_timeout_seconds = c.verus.timeout_seconds;

  if (j.contains("backend")) {
    const auto& b = j["backend"];
    check_keys(b, "backend", {"mode", "base_url", "model", "api_key_env", "temperature", "timeout_seconds", "max_attempts",
                              "cassette_dir", "script"});
    if (!b.contains("mode")) throw ConfigError("backend.mode is required");
    BackendSettings s;
    s.mode = parse_mode(get<std::string>(b, "mode", "backend", ""));
    s.live.base_url = get<std::string>(b, "base_url", "backend", "");
    s.live.model = get<std::string>(b, "model", "backend", "");
    s.live.api_key_env = get<std::string>(b, "api_key_env", "backend", "");
    s.live.temperature = get<double>(b, "temperature", "backend", 0.0);
    s.live.timeout_seconds = get<int>(b, "timeout_seconds", "backend", s.live.timeout_seconds);
    s.live.max_attempts = get<int>(b, "max_attempts", "backend", s.live.max_attempts);
    s.cassette_dir = resolve(base_dir, get<std::string>(b, "cassette_dir", "backend", ""));
    s.script = resolve(base_dir, get<std::string>(b, "script", "backend", ""));
    c.backend = s;
  }

  if (j.contains("lift")) {
    const auto& l = j["lift"];
    check_keys(l, "lift", {"max_transform_loops", "max_repair_iters", "checker_categories", "lenient"});
    c.lift.max_transform_loops = get<std::uint32_t>(l, "max_transform_loops", "lift", c.lift.max_transform_loops);
    c.lift.max_repair_iters = get<std::uint32_t>(l, "max_repair_iters", "lift", c.lift.max_repair_iters);
    c.lift.lenient = get<bool>(l, "lenient", "lift", false);
    if (l.contains("checker_categories")) {
      c.lift.checker_categories.clear();
      for (const auto& name : get<std::vector<std::string>>(l, "checker_categories", "lift", {})) {
        auto cat = z3proof::parse_category(name);
        if (!cat) throw ConfigError("unknown checker category '" + name + "'");
        c.lift.checker_categories.push_back(*cat);
      }
    }
  }

  if (j.contains("suite")) {
    const auto& s = j["suite"];
    check_keys(s, "suite", {"seed", "markers"});
    c.suite_seed = get<std::uint64_t>(s, "seed", "suite", 0);
    c.markers = get<bool>(s, "markers", "suite", false);
  }

  c.output_root = resolve(base_dir, get<std::string>(j, "output_root", "config", "."));
  apply_env(c, fs::current_path(), env);
  if (c.backend) validate_backend(*c.backend);
  c.lift.validate();
  return c;
}

ToolConfig load_config(const fs::path& path, const EnvLookup& env) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path(), env);
}

ToolConfig default_config(const EnvLookup& env) { return parse_config(json::object(), fs::current_path(), env); }

std::unique_ptr<agents::AgentBackend> make_backend(const BackendSettings& s) {
  switch (s.mode) {
    case BackendMode::Live: return std::make_unique<agents::LiveBackend>(s.live);
    case BackendMode::Replay:
      if (!fs::exists(s.cassette_dir)) throw ConfigError("cassette path " + s.cassette_dir.string() + " does not exist");
      return std::make_unique<agents::ReplayBackend>(s.cassette_dir);
    case BackendMode::Scripted:
      if (!fs::exists(s.script)) throw ConfigError("script " + s.script.string() + " does not exist");
      return agents::ScriptedBackend::from_json_file(s.script);
  }
  throw ConfigError("no backend");
}

}  // namespace vcot::config
