#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vcot/diagnostics.hpp"

namespace vcot::pipeline {

/// Runs Verus on a program text. Implementations must be safe to call from
/// several threads at once.
class VerusRunner {
 public:
  virtual ~VerusRunner() = default;
  /// Throws VerusUnavailable. A run that exceeds its time limit is reported
  /// as an unverified result with a timeout error entry.
  virtual VerusDiagnostics run(std::string_view source, VerusMode mode) = 0;
};

struct VerusSettings {
  std::string binary;  // empty: VERUS_BIN, then `verus` on PATH
  int timeout_seconds = 120;
  std::vector<std::string> extra_args;
};

/// Resolution order: explicit setting, VERUS_BIN, PATH. Throws VerusUnavailable.
std::filesystem::path resolve_verus_binary(const std::string& configured);

/// Reads rustc-style `error[...]: message` / `--> file:line:col` pairs.
VerusDiagnostics parse_verus_output(std::string_view output, int exit_code, VerusMode mode);

class SubprocessVerus : public VerusRunner {
 public:
  explicit SubprocessVerus(VerusSettings settings);
  VerusDiagnostics run(std::string_view source, VerusMode mode) override;
  const std::filesystem::path& binary() const { return binary_; }

 private:
  VerusSettings settings_;
  std::filesystem::path binary_;
};

}  // namespace vcot::pipeline
