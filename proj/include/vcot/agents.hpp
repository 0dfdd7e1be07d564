#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vcot/diagnostics.hpp"
#include "vcot/z3proof.hpp"

namespace vcot::agents {

enum class AgentKind : std::uint8_t { Transformer, Checker, Pruner, Repair, Judge };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view name);

struct AgentRequest {
  AgentKind kind;
  std::string tag;  // checker category, empty for the other agents
  std::string system_prompt;
  std::string user_prompt;
};

struct AgentResponse {
  std::string text;
};

/// Anything that turns a prompt into a completion. Implementations must
/// tolerate concurrent calls.
class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual AgentResponse complete(const AgentRequest& request) = 0;
};

// ---- transformer ---------------------------------------------------------

struct TransformerInput {
  std::string_view program;     // original Verus source
  std::string_view trace_text;  // raw Z3 proof
  const z3proof::ProofDocument* proof = nullptr;
  const std::vector<z3proof::RuleLevel>* levels = nullptr;  // per node
  /// Set from the second loop on: the previous candidate and whether the
  /// checkers found it incomplete. Nothing else from the checkers is passed.
  std::optional<std::string> previous_candidate;
  bool previous_incomplete = false;
};

/// Throws BackendError, or ProtocolError if the answer has no PROGRAM
/// section after one re-ask.
std::string run_transformer(const TransformerInput& input, AgentBackend& backend);

// ---- checkers ------------------------------------------------------------

enum class Disposition : std::uint8_t { Mapped, Missing, FilteredTrivial, FilteredRedundant };
enum class RedundancyKind : std::uint8_t { Normalization, Reassertion, DefinitionExpansion };

std::string_view to_string(Disposition d);
std::string_view to_string(RedundancyKind k);
std::optional<RedundancyKind> parse_redundancy_kind(std::string_view name);

struct MappingEntry {
  z3proof::NodeId z3_node;
  Disposition disposition;
  std::optional<RedundancyKind> redundancy;  // FilteredRedundant only
  /// Verus step for Mapped, justification for the filtered dispositions.
  std::string text;
};

enum class VerdictStatus : std::uint8_t { Complete, Incomplete };

std::string_view to_string(VerdictStatus s);

/// Status is derived from the mapping: Complete iff no entry is Missing.
class CheckerVerdict {
 public:
  CheckerVerdict(z3proof::RuleCategory category, std::vector<MappingEntry> mapping);

  z3proof::RuleCategory category() const { return category_; }
  VerdictStatus status() const { return status_; }
  bool complete() const { return status_ == VerdictStatus::Complete; }
  const std::vector<MappingEntry>& mapping() const { return mapping_; }

 private:
  z3proof::RuleCategory category_;
  std::vector<MappingEntry> mapping_;
  VerdictStatus status_;
};

struct CheckerInput {
  z3proof::RuleCategory category;
  const z3proof::AggregatedSegments* segments = nullptr;
  const z3proof::ProofDocument* proof = nullptr;
  const std::vector<z3proof::RuleLevel>* levels = nullptr;
  std::string_view candidate;
};

/// One entry per anchor. With no anchors the verdict is Complete and the
/// backend is not consulted.
CheckerVerdict run_checker(const CheckerInput& input, AgentBackend& backend);

/// Parses a MAPPING table against the expected anchors. Throws ProtocolError.
std::vector<MappingEntry> parse_mapping(std::string_view response, const std::vector<z3proof::NodeId>& anchors);

// ---- pruner --------------------------------------------------------------

enum class RemovalClass : std::uint8_t { Trivial, Redundant };

std::string_view to_string(RemovalClass c);

struct Removal {
  std::uint32_t first_line;  // 1-based, inclusive
  std::uint32_t last_line;
  std::size_t begin;  // byte span in the candidate
  std::size_t end;
  RemovalClass cls;
  std::optional<RedundancyKind> redundancy;
  std::string justification;
};

struct PrunerDecision {
  std::vector<Removal> removals;  // ascending, disjoint
};

struct PruneResult {
  std::string pruned;
  PrunerDecision decision;
};

PruneResult run_pruner(std::string_view candidate, AgentBackend& backend);

/// Validates a DECISIONS section against `candidate` and applies it.
/// Throws ProtocolError.
PruneResult apply_decisions(std::string_view candidate, std::string_view response);

/// Inverse of pruning: puts the removed text back.
std::string restore_pruned(std::string_view pruned, const PrunerDecision& decision, std::string_view candidate);

// ---- repair --------------------------------------------------------------

std::string run_repair(std::string_view candidate, const VerusDiagnostics& diagnostics, AgentBackend& backend);

// ---- judge ---------------------------------------------------------------

struct JudgeVerdict {
  bool semantically_correct;
  std::string rationale;
};

/// Identity completions are accepted and empty completions rejected
/// without a model call. `tag` labels the request (scripted lookup, logs).
JudgeVerdict run_judge(const std::vector<std::string>& ground_truth_blocks, std::string_view candidate_completion,
                       std::string_view program_context, AgentBackend& backend, std::string_view tag = {});

}  // namespace vcot::agents
