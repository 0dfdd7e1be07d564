#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vcot/agents.hpp"

namespace vcot::agents {

/// One line per rule: name, level, category if any, and description.
/// With an empty `only` set, every rule in the hierarchy is listed.
std::string rule_glossary(const std::set<std::string>& only = {});

/// The trace with a level tag in front of every line that holds a rule
/// application (`[H]`, `[M]`, `[L]`; highest level wins on shared lines).
std::string tag_trace_lines(std::string_view trace_text, const z3proof::ProofDocument& proof,
                            const std::vector<z3proof::RuleLevel>& levels);

/// Canonical rule names present in `proof` (aliases folded).
std::set<std::string> rules_present(const z3proof::ProofDocument& proof, const std::vector<z3proof::NodeId>* subset = nullptr);

AgentRequest transformer_request(const TransformerInput& input);
AgentRequest checker_request(const CheckerInput& input);
AgentRequest pruner_request(std::string_view candidate);
AgentRequest repair_request(std::string_view candidate, const VerusDiagnostics& diagnostics);
AgentRequest judge_request(const std::vector<std::string>& ground_truth_blocks, std::string_view candidate_completion,
                           std::string_view program_context);

/// Candidate text with `L<n>: ` prefixes, as shown to the pruner.
std::string number_lines(std::string_view text);

/// Prompt asset by file stem. Throws std::out_of_range.
std::string_view asset(std::string_view name);

}  // namespace vcot::agents
