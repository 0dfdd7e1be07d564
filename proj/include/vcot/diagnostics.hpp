#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vcot {

enum class VerusMode : std::uint8_t { Verify, SyntaxOnly };

struct VerusError {
  std::uint32_t line = 0;  // 0 when the tool gave no location
  std::string message;
  std::optional<std::string> code;
  bool timeout = false;
};

/// Parsed result of one Verus run. `verified` implies `errors` is empty.
struct VerusDiagnostics {
  bool verified = false;
  std::vector<VerusError> errors;
  std::string raw_output;
  VerusMode mode = VerusMode::Verify;

  bool timed_out() const {
    for (const auto& e : errors)
      if (e.timeout) return true;
    return false;
  }
};

}  // namespace vcot
