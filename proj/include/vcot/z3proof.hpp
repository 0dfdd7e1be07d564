#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vcot::z3proof {

using NodeId = std::uint32_t;

enum class RuleLevel : std::uint8_t { High, Medium, Low };
enum class RuleCategory : std::uint8_t { Lemma, TheoryLemma, ModusPonens, Quantifier, UnitResolution };

inline constexpr std::array<RuleLevel, 3> kAllLevels = {RuleLevel::High, RuleLevel::Medium, RuleLevel::Low};

/// Fixed checker order: Lemma, TheoryLemma, ModusPonens, Quantifier, UnitResolution.
inline constexpr std::array<RuleCategory, 5> kAllCategories = {
    RuleCategory::Lemma, RuleCategory::TheoryLemma, RuleCategory::ModusPonens, RuleCategory::Quantifier,
    RuleCategory::UnitResolution};

std::string_view to_string(RuleLevel level);
std::string_view to_string(RuleCategory category);
std::optional<RuleCategory> parse_category(std::string_view name);
std::optional<RuleLevel> parse_level(std::string_view name);

struct RuleInfo {
  std::string_view name;
  RuleLevel level;
  std::optional<RuleCategory> category;
  std::string_view description;
};

/// The 36-rule hierarchy, High rules first.
std::span<const RuleInfo> rule_table();

/// Looks a rule up by its canonical name or by the spelling Z3 prints
/// (`sk`, `intro-def`, `iff~`, `=`, `~`). Returns nullptr when unknown.
const RuleInfo* find_rule(std::string_view name);

/// Throws UnknownRule for names outside the table unless `lenient`, in which
/// case unknown rules are Low.
RuleLevel classify_rule(std::string_view rule_name, bool lenient = false);

std::optional<RuleCategory> categorize_rule(std::string_view rule_name);

struct ProofNode {
  NodeId id;
  std::string rule;
  std::vector<NodeId> premises;
  /// Raw conclusion text as written: usually a `$x` binding name. Use
  /// ProofDocument::expand to see the term behind it.
  std::string conclusion;
  std::uint32_t source_line;
};

/// A parsed Z3 proof. Node ids are dense and assigned in completion order,
/// so every premise id is smaller than the id of the node using it. That
/// order is what the rest of the toolchain calls trace order.
class ProofDocument {
 public:
  const std::vector<ProofNode>& nodes() const { return nodes_; }
  const ProofNode& node(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId id) const { return id < nodes_.size(); }

  /// Proof bindings (`@x...`) to the node they name.
  const std::unordered_map<std::string, NodeId>& bindings() const { return bindings_; }
  /// Shared-term bindings (`$x...`, `?x...`) to their raw definition text.
  const std::unordered_map<std::string, std::string>& term_bindings() const { return term_bindings_; }

  /// Nodes no other node uses as a premise, ascending.
  const std::vector<NodeId>& roots() const { return roots_; }

  /// Inline shared-term bindings in `term` until the result would exceed
  /// `budget` bytes; names left unexpanded stay as written.
  std::string expand(std::string_view term, std::size_t budget = 4096) const;
  std::string resolved_conclusion(NodeId id, std::size_t budget = 4096) const {
    return expand(node(id).conclusion, budget);
  }

  /// Builds a document directly from nodes; used by tests and generators.
  /// Throws std::invalid_argument if a premise does not precede its user.
  static ProofDocument from_nodes(std::vector<ProofNode> nodes);

 private:
  friend ProofDocument parse_proof(std::string_view trace_text);
  void finish();

  std::vector<ProofNode> nodes_;
  std::unordered_map<std::string, NodeId> bindings_;
  std::unordered_map<std::string, std::string> term_bindings_;
  std::vector<NodeId> roots_;
};

/// Parses a Z3 proof trace. Accepted shapes: a bare proof term, `(proof
/// ...)`, and the `((set-logic ...) ... (proof ...))` wrapper newer Z3
/// versions print after `unsat`. Throws ParseError.
ProofDocument parse_proof(std::string_view trace_text);

struct ProofSegment {
  NodeId anchor;
  std::vector<NodeId> members;  // ascending, anchor included
};

ProofSegment dependency_subtree(const ProofDocument& doc, NodeId anchor);

struct AggregatedSegments {
  RuleCategory category;
  std::vector<NodeId> anchors;  // trace order
  std::vector<NodeId> members;  // union of anchor subtrees, trace order, no duplicates
};

AggregatedSegments aggregate_segments(const ProofDocument& doc, RuleCategory category);

struct LevelStat {
  std::size_t count = 0;
  double share = 0.0;
};

struct ProofStats {
  std::size_t node_count = 0;
  std::size_t trace_line_count = 0;
  std::array<LevelStat, 3> levels{};  // indexed by RuleLevel
  std::map<std::string, std::size_t> per_rule;

  const LevelStat& level(RuleLevel l) const { return levels[static_cast<std::size_t>(l)]; }
};

ProofStats proof_stats(const ProofDocument& doc, std::string_view trace_text, bool lenient = false);

/// Per-node level, honoring `lenient` as in classify_rule.
std::vector<RuleLevel> annotate_levels(const ProofDocument& doc, bool lenient = false);

}  // namespace vcot::z3proof
