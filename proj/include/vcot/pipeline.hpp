#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcot/agents.hpp"
#include "vcot/verus_model.hpp"
#include "vcot/verus_runner.hpp"
#include "vcot/z3proof.hpp"

namespace vcot::pipeline {

struct LiftConfig {
  std::uint32_t max_transform_loops = 5;
  std::uint32_t max_repair_iters = 5;
  int verus_timeout_seconds = 120;
  std::vector<z3proof::RuleCategory> checker_categories{z3proof::kAllCategories.begin(), z3proof::kAllCategories.end()};
  bool lenient = false;  // unknown proof rules count as Low

  /// Throws ConfigError when a cap is zero, the timeout is not positive,
  /// or a category is listed twice.
  void validate() const;
};

enum class LiftStatus : std::uint8_t { Lifted, IncompleteAfterCap, RepairFailedAfterCap, VerusUnavailable };

std::string_view to_string(LiftStatus s);

struct LoopRecord {
  std::uint32_t loop;  // 1-based
  std::string candidate;
  std::vector<agents::CheckerVerdict> verdicts;
  bool complete = false;
  std::vector<std::string> notes;  // protocol failures and the like
};

struct RepairRecord {
  std::uint32_t iter;  // 1-based
  std::string program;
  VerusDiagnostics diagnostics;  // Verify run on `program`
  std::vector<std::string> notes;
};

struct LiftOutcome {
  LiftStatus status = LiftStatus::IncompleteAfterCap;
  std::string final_program;
  std::uint32_t transform_loops_used = 0;
  std::uint32_t repair_iters_used = 0;
  std::vector<LoopRecord> loops;
  std::optional<agents::PruneResult> prune;  // absent if the pruner failed
  std::string pruned_program;
  std::optional<VerusDiagnostics> pruned_diagnostics;
  std::vector<RepairRecord> repairs;
  std::optional<VerusDiagnostics> final_diagnostics;
  std::size_t agent_calls = 0;
  std::vector<std::string> notes;
};

/// Transformer-checker loop, pruning, then verifier-driven repair. When
/// `run_dir` is given, artifacts are written there as they are produced
/// (the directory must be absent or empty). Agent protocol failures are
/// absorbed into the outcome; backend failures propagate.
LiftOutcome lift(const verus::VerusProgram& program, const z3proof::ProofDocument& proof, std::string_view trace_text,
                 const LiftConfig& config, agents::AgentBackend& backend, VerusRunner& verus,
                 const std::optional<std::filesystem::path>& run_dir = std::nullopt);

nlohmann::json to_json(const VerusDiagnostics& d);
nlohmann::json to_json(const agents::CheckerVerdict& v);
nlohmann::json to_json(const agents::PrunerDecision& d);
nlohmann::json outcome_json(const LiftOutcome& outcome);

}  // namespace vcot::pipeline
