#pragma once

// Helpers to script a whole lift run against the fixture trace.

#include <string>

#include "vcot/backends.hpp"
#include "vcot/z3proof.hpp"

namespace vcot::testing {

inline std::string program_answer(const std::string& body) { return "### PROGRAM\n```rust\n" + body + "```\n"; }

/// A MAPPING answer covering every anchor of `category`, all MAPPED or all MISSING.
inline std::string mapping_answer(const z3proof::ProofDocument& doc, z3proof::RuleCategory category, bool complete,
                                  const std::string& note = "see the loop invariant") {
  auto seg = z3proof::aggregate_segments(doc, category);
  std::string out = "### MAPPING\n```\n";
  for (auto a : seg.anchors) {
    out += "n" + std::to_string(a) + (complete ? " | MAPPED | " + note : std::string(" | MISSING")) + "\n";
  }
  return out + "```\n";
}

/// Checkers answer incomplete for the first `incomplete_rounds` rounds, then complete.
inline void script_checkers(agents::ScriptedBackend& b, const z3proof::ProofDocument& doc, int incomplete_rounds,
                            const std::string& note = "see the loop invariant") {
  for (auto c : z3proof::kAllCategories) {
    std::string key = "checker:" + std::string(z3proof::to_string(c));
    for (int i = 0; i < incomplete_rounds; ++i) b.add(key, mapping_answer(doc, c, false));
    b.add(key, mapping_answer(doc, c, true, note));
  }
}

}  // namespace vcot::testing
