#include "vcot/prompts.hpp"

#include <algorithm>

#include "vcot/assets.hpp"
#include "vcot/util.hpp"

namespace vcot::agents {

using namespace z3proof;

std::string_view asset(std::string_view name) {
  const auto& table = assets::all();
  auto it = table.find(std::string(name));
  if (it == table.end()) throw std::out_of_range("no prompt asset '" + std::string(name) + "'");
  return it->second;
}

namespace {

char level_letter(RuleLevel l) {
  switch (l) {
    case RuleLevel::High: return 'H';
    case RuleLevel::Medium: return 'M';
    case RuleLevel::Low: return 'L';
  }
  return '?';
}

std::string checker_asset_name(RuleCategory c) {
  std::string name = "checker_" + std::string(to_string(c));
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

}  // namespace

std::string rule_glossary(const std::set<std::string>& only) {
  std::string out;
  for (const auto& r : rule_table()) {
    if (!only.empty() && !only.count(std::string(r.name))) continue;
    out += "- ";
    out += r.name;
    out += " [";
    out += to_upper(to_string(r.level));
    if (r.category) {
      out += ", ";
      out += to_string(*r.category);
    }
    out += "]: ";
    out += r.description;
    out += '\n';
  }
  return out;
}

std::set<std::string> rules_present(const ProofDocument& proof, const std::vector<NodeId>* subset) {
  std::set<std::string> out;
  auto add = [&](const ProofNode& n) {
    if (const auto* info = find_rule(n.rule)) out.emplace(info->name);
  };
  if (subset) {
    for (auto id : *subset) add(proof.node(id));
  } else {
    for (const auto& n : proof.nodes()) add(n);
  }
  return out;
}

std::string tag_trace_lines(std::string_view trace_text, const ProofDocument& proof, const std::vector<RuleLevel>& levels) {
  auto lines = split_lines(trace_text);
  // lower enum value = higher level
  std::vector<int> best(lines.size() + 2, -1);
  for (const auto& n : proof.nodes()) {
    auto l = static_cast<int>(levels.at(n.id));
    auto& slot = best.at(std::min<std::size_t>(n.source_line, best.size() - 1));
    if (slot < 0 || l < slot) slot = l;
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int b = best[i + 1];
    if (b < 0) {
      out += "    ";
    } else {
      out += '[';
      out += level_letter(static_cast<RuleLevel>(b));
      out += "] ";
    }
    out.append(lines[i]);
    out += '\n';
  }
  return out;
}

AgentRequest transformer_request(const TransformerInput& in) {
  AgentRequest req{AgentKind::Transformer, "", std::string(asset("transformer")), ""};
  std::string& u = req.user_prompt;
  u += "## Rule glossary\n\n";
  u += rule_glossary();
  u += "\n## Verus program\n\n```rust\n";
  u.append(in.program);
  if (!in.program.empty() && in.program.back() != '\n') u += '\n';
  u += "```\n\n## Z3 proof (level-tagged)\n\n```\n";
  u += tag_trace_lines(in.trace_text, *in.proof, *in.levels);
  u += "```\n";
  if (in.previous_candidate) {
    u += "\n## Your previous candidate\n\n```rust\n";
    u += *in.previous_candidate;
    if (!in.previous_candidate->empty() && in.previous_candidate->back() != '\n') u += '\n';
    u += "```\n\n";
    u += in.previous_incomplete
             ? "Review result: INCOMPLETE. Some high-level proof steps are still not reflected. Produce a revised complete program.\n"
             : "Review result: COMPLETE.\n";
  }
  return req;
}

AgentRequest checker_request(const CheckerInput& in) {
  const auto& proof = *in.proof;
  const auto& seg = *in.segments;
  AgentRequest req{AgentKind::Checker, std::string(to_string(in.category)), "", ""};
  req.system_prompt = std::string(asset("checker_common")) + "\n" + std::string(asset(checker_asset_name(in.category)));

  std::set<NodeId> anchors(seg.anchors.begin(), seg.anchors.end());
  std::string& u = req.user_prompt;
  u += "## Rules in this batch\n\n";
  u += rule_glossary(rules_present(proof, &seg.members));
  u += "\n## Proof steps (";
  u += std::to_string(seg.anchors.size());
  u += " anchors, ";
  u += std::to_string(seg.members.size());
  u += " steps)\n\n```\n";
  for (auto id : seg.members) {
    const auto& n = proof.node(id);
    u += anchors.count(id) ? "* " : "  ";
    u += "n" + std::to_string(id) + " [" + level_letter(in.levels->at(id)) + "] " + n.rule;
    if (!n.premises.empty()) {
      u += " from";
      for (auto p : n.premises) u += " n" + std::to_string(p);
    }
    u += " |- ";
    u += proof.resolved_conclusion(id, 600);
    u += '\n';
  }
  u += "```\n\n## Candidate program\n\n```rust\n";
  u.append(in.candidate);
  if (!in.candidate.empty() && in.candidate.back() != '\n') u += '\n';
  u += "```\n\nAnchors to account for:";
  for (auto a : seg.anchors) u += " n" + std::to_string(a);
  u += '\n';
  return req;
}

std::string number_lines(std::string_view text) {
  std::string out;
  auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += "L" + std::to_string(i + 1) + ": ";
    out.append(lines[i]);
    out += '\n';
  }
  return out;
}

AgentRequest pruner_request(std::string_view candidate) {
  AgentRequest req{AgentKind::Pruner, "", std::string(asset("pruner")), ""};
  req.user_prompt = "## Program\n\n```\n" + number_lines(candidate) + "```\n";
  return req;
}

AgentRequest repair_request(std::string_view candidate, const VerusDiagnostics& diag) {
  AgentRequest req{AgentKind::Repair, "", std::string(asset("repair")), ""};
  std::string& u = req.user_prompt;
  u += "## Program\n\n```rust\n";
  u.append(candidate);
  if (!candidate.empty() && candidate.back() != '\n') u += '\n';
  u += "```\n\n## Verus diagnostics (";
  u += diag.mode == VerusMode::Verify ? "verify" : "syntax-only";
  u += ")\n\n";
  for (const auto& e : diag.errors) {
    u += "- ";
    if (e.line) u += "line " + std::to_string(e.line) + ": ";
    if (e.code) u += "[" + *e.code + "] ";
    u += e.message;
    u += '\n';
  }
  if (!diag.raw_output.empty()) {
    u += "\nFull output:\n\n```\n";
    u += diag.raw_output;
    if (diag.raw_output.back() != '\n') u += '\n';
    u += "```\n";
  }
  return req;
}

AgentRequest judge_request(const std::vector<std::string>& gt, std::string_view completion, std::string_view context) {
  AgentRequest req{AgentKind::Judge, "", std::string(asset("judge_protocol")) + "\n" + std::string(asset("judge_examples")), ""};
  std::string& u = req.user_prompt;
  u += "## Masked program\n\n```rust\n";
  u.append(context);
  if (!context.empty() && context.back() != '\n') u += '\n';
  u += "```\n\n## Ground truth\n\n";
  for (std::size_t i = 0; i < gt.size(); ++i) {
    u += "Block " + std::to_string(i + 1) + ":\n```rust\n" + gt[i];
    if (!gt[i].empty() && gt[i].back() != '\n') u += '\n';
    u += "```\n";
  }
  u += "\n## Model fill\n\n";
  u.append(completion);
  if (!completion.empty() && completion.back() != '\n') u += '\n';
  return req;
}

}  // namespace vcot::agents
