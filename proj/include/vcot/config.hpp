#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "vcot/backends.hpp"
#include "vcot/pipeline.hpp"
#include "vcot/verus_runner.hpp"

namespace vcot::config {

enum class BackendMode : std::uint8_t { Live, Replay, Scripted };

std::string_view to_string(BackendMode m);

struct BackendSettings {
  BackendMode mode = BackendMode::Replay;
  agents::LiveConfig live;
  std::filesystem::path cassette_dir;  // replay
  std::filesystem::path script;        // scripted
};

/// One file configures everything; see README for the schema.
struct ToolConfig {
  pipeline::VerusSettings verus;
  std::optional<BackendSettings> backend;  // absent: commands needing a model fail
  pipeline::LiftConfig lift;
  std::uint64_t suite_seed = 0;
  bool markers = false;
  std::filesystem::path output_root = ".";
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Relative paths resolve against `base_dir`. Environment overrides
/// (VCOT_VERUS_BIN, VCOT_BACKEND_MODE, VCOT_BASE_URL, VCOT_MODEL,
/// VCOT_API_KEY_ENV, VCOT_CASSETTE_DIR, VCOT_SCRIPT, VCOT_OUTPUT_ROOT) win
/// over the file. Unknown keys and inconsistent backend settings raise
/// ConfigError.
ToolConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir, const EnvLookup& env = process_env);
ToolConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
/// Defaults plus environment overrides, for runs without a config file.
ToolConfig default_config(const EnvLookup& env = process_env);

std::unique_ptr<agents::AgentBackend> make_backend(const BackendSettings& settings);

}  // namespace vcot::config
