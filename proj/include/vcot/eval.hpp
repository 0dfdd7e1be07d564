#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcot/agents.hpp"
#include "vcot/benchgen.hpp"
#include "vcot/verus_runner.hpp"

namespace vcot::eval {

/// Four correctness levels: 3 both, 2 semantic only, 1 syntactic only, 0 neither.
int rate(bool syn_ok, bool sem_ok);

struct CompletionRecord {
  std::string task_id;
  std::string model_id;
  std::string completion;
  std::string candidate_source;  // after splicing; empty when a hole key was missing
  std::optional<bool> syn_ok;
  std::optional<bool> sem_ok;
  std::optional<int> level;

  // diagnostics, not part of the score
  bool missing_hole = false;
  bool syntax_timed_out = false;
  bool identity = false;
  std::string judge_rationale;
  std::vector<std::string> syntax_errors;
  std::map<verus::BlockId, bool> per_block;  // only with per-block judging
};

struct AccuracyReport {
  std::size_t n = 0;
  std::array<std::size_t, 4> levels{};  // N0..N3
  double syn_acc = 0;
  double sem_acc = 0;
  double acc = 0;
};

/// Throws EmptySet for no records, std::invalid_argument for an unrated one.
AccuracyReport accuracy(const std::vector<CompletionRecord>& records);
AccuracyReport accuracy_from_levels(const std::array<std::size_t, 4>& levels);

struct BreakdownRow {
  std::string axis;   // ratio | type | loc | model | total
  std::string group;  // "30", "invariant", "front", model id, "all"
  std::string model;  // "*" on the total row
  AccuracyReport report;
};

/// Per model: one row per ratio decile, Type kind and Loc zone present,
/// then the model's own row; a final total row over every record.
/// Throws UnknownTask.
std::vector<BreakdownRow> breakdown(const std::vector<CompletionRecord>& records, const benchgen::BenchSuite& suite);
std::string breakdown_csv(const std::vector<BreakdownRow>& rows);

/// `n` task ids apportioned over the Ratio/Type/Loc strata by largest
/// remainder, drawn uniformly inside each stratum, returned in suite order.
/// Throws std::invalid_argument when n exceeds the suite.
std::vector<std::string> stratified_sample(const benchgen::BenchSuite& suite, std::size_t n, std::uint64_t seed);

/// Largest-remainder apportionment of `n` over `sizes`; ties go to the
/// earlier stratum.
std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t n);

/// SyntaxOnly run on the spliced program. Throws VerusUnavailable.
struct SyntaxResult {
  bool ok = false;
  bool timed_out = false;
  std::vector<std::string> errors;
};
SyntaxResult check_syntax(std::string_view candidate_source, pipeline::VerusRunner& verus);

struct EvalOptions {
  unsigned jobs = 1;
  bool per_block = false;
};

/// Splices, checks syntax and judges every record. Records come back in
/// input order. Missing Verus aborts with VerusUnavailable.
std::vector<CompletionRecord> evaluate(const benchgen::BenchSuite& suite, std::vector<CompletionRecord> records,
                                       pipeline::VerusRunner& verus, agents::AgentBackend& judge, EvalOptions options = {});

/// One record: task lookup, splice, syntax, judge.
CompletionRecord evaluate_one(const benchgen::TaskDescriptor& task, CompletionRecord record, pipeline::VerusRunner& verus,
                              agents::AgentBackend& judge, bool per_block = false);

/// Line-delimited {task_id, model_id, completion}.
std::vector<CompletionRecord> read_completions(const std::filesystem::path& path);
nlohmann::json record_to_json(const CompletionRecord& r);
CompletionRecord record_from_json(const nlohmann::json& j);
std::vector<CompletionRecord> read_records(const std::filesystem::path& path);
std::string records_jsonl(const std::vector<CompletionRecord>& records);
nlohmann::json report_json(const AccuracyReport& r);

// ---- judge meta-evaluation -----------------------------------------------

struct LabeledItem {
  std::string task_id;
  std::string completion;
  bool label;  // human verdict: semantically correct
};

struct MetaEvalItem {
  LabeledItem item;
  bool judge_verdict;
  std::string rationale;
};

struct MetaEvalResult {
  std::vector<MetaEvalItem> items;
  std::size_t agreements = 0;
  double agreement() const { return items.empty() ? 0.0 : static_cast<double>(agreements) / items.size(); }
};

/// Line-delimited {task_id, completion, label}.
std::vector<LabeledItem> read_labels(const std::filesystem::path& path);
MetaEvalResult meta_evaluate(const benchgen::BenchSuite& suite, const std::vector<LabeledItem>& labels,
                             agents::AgentBackend& judge);

}  // namespace vcot::eval
