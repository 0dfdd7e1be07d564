#include "vcot/agents.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>

#include "vcot/error.hpp"
#include "vcot/prompts.hpp"
#include "vcot/sections.hpp"
#include "vcot/util.hpp"
#include "vcot/verus_model.hpp"

namespace vcot::agents {

using namespace z3proof;

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Transformer: return "transformer";
    case AgentKind::Checker: return "checker";
    case AgentKind::Pruner: return "pruner";
    case AgentKind::Repair: return "repair";
    case AgentKind::Judge: return "judge";
  }
  return "?";
}

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
  for (auto k : {AgentKind::Transformer, AgentKind::Checker, AgentKind::Pruner, AgentKind::Repair, AgentKind::Judge})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::Mapped: return "MAPPED";
    case Disposition::Missing: return "MISSING";
    case Disposition::FilteredTrivial: return "TRIVIAL";
    case Disposition::FilteredRedundant: return "REDUNDANT";
  }
  return "?";
}

std::string_view to_string(RedundancyKind k) {
  switch (k) {
    case RedundancyKind::Normalization: return "NORMALIZATION";
    case RedundancyKind::Reassertion: return "REASSERTION";
    case RedundancyKind::DefinitionExpansion: return "DEFINITION-EXPANSION";
  }
  return "?";
}

std::optional<RedundancyKind> parse_redundancy_kind(std::string_view name) {
  auto n = to_upper(trim(name));
  std::replace(n.begin(), n.end(), '_', '-');
  std::replace(n.begin(), n.end(), ' ', '-');
  for (auto k : {RedundancyKind::Normalization, RedundancyKind::Reassertion, RedundancyKind::DefinitionExpansion})
    if (to_string(k) == n) return k;
  return std::nullopt;
}

std::string_view to_string(VerdictStatus s) { return s == VerdictStatus::Complete ? "complete" : "incomplete"; }

std::string_view to_string(RemovalClass c) { return c == RemovalClass::Trivial ? "TRIVIAL" : "REDUNDANT"; }

CheckerVerdict::CheckerVerdict(RuleCategory category, std::vector<MappingEntry> mapping)
    : category_(category), mapping_(std::move(mapping)) {
  bool missing = std::any_of(mapping_.begin(), mapping_.end(),
                             [](const MappingEntry& e) { return e.disposition == Disposition::Missing; });
  status_ = missing ? VerdictStatus::Incomplete : VerdictStatus::Complete;
}

namespace {

// Sends `request`; if `parse` rejects the answer, asks once more with the
// reason attached, then gives up.
template <class Parse>
auto ask(AgentBackend& backend, AgentRequest request, Parse parse) -> decltype(parse(std::string_view{})) {
  auto first = backend.complete(request);
  try {
    return parse(first.text);
  } catch (const ProtocolError& e) {
    request.user_prompt += "\n\nYour previous answer could not be used: ";
    request.user_prompt += e.what();
    request.user_prompt += "\nAnswer again, using exactly the required sections.\n";
  }
  auto second = backend.complete(request);
  try {
    return parse(second.text);
  } catch (const ProtocolError& e) {
    throw ProtocolError(std::string(to_string(request.kind)) + " answer rejected after retry: " + e.what());
  }
}

std::string program_section(std::string_view text) {
  auto sections = parse_sections(text);
  const auto* s = find_section(sections, "PROGRAM");
  if (!s) throw ProtocolError("missing PROGRAM section");
  if (trim(s->body).empty()) throw ProtocolError("PROGRAM section is empty");
  return s->body;
}

std::vector<std::string_view> table_rows(std::string_view body) {
  std::vector<std::string_view> rows;
  for (auto line : split_lines(body)) {
    auto t = trim(line);
    while (!t.empty() && (t.front() == '-' || t.front() == '*' || t.front() == '`')) t = trim(t.substr(1));
    while (!t.empty() && t.back() == '`') t.remove_suffix(1);
    if (!t.empty()) rows.push_back(t);
  }
  return rows;
}

std::vector<std::string_view> split_fields(std::string_view row, std::size_t max_fields) {
  std::vector<std::string_view> out;
  while (out.size() + 1 < max_fields) {
    auto bar = row.find('|');
    if (bar == std::string_view::npos) break;
    out.push_back(trim(row.substr(0, bar)));
    row = row.substr(bar + 1);
  }
  out.push_back(trim(row));
  return out;
}

template <class T>
bool parse_uint(std::string_view s, T& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

std::string disposition_error(NodeId id, std::string_view what) {
  return "n" + std::to_string(id) + ": " + std::string(what);
}

}  // namespace

std::string run_transformer(const TransformerInput& input, AgentBackend& backend) {
  return ask(backend, transformer_request(input), program_section);
}

std::vector<MappingEntry> parse_mapping(std::string_view response, const std::vector<NodeId>& anchors) {
  auto sections = parse_sections(response);
  const auto* s = find_section(sections, "MAPPING");
  if (!s) throw ProtocolError("missing MAPPING section");

  std::map<NodeId, MappingEntry> by_node;
  for (auto row : table_rows(s->body)) {
    auto f = split_fields(row, 3);
    auto id_text = f[0];
    if (!id_text.empty() && (id_text.front() == 'n' || id_text.front() == 'N')) id_text.remove_prefix(1);
    NodeId id = 0;
    if (!parse_uint(id_text, id)) throw ProtocolError("bad mapping row '" + std::string(row) + "'");
    if (f.size() < 2) throw ProtocolError(disposition_error(id, "no disposition"));

    auto disp = to_upper(f[1]);
    std::string text = f.size() > 2 ? std::string(f[2]) : std::string();
    MappingEntry e{id, Disposition::Missing, std::nullopt, text};
    if (disp == "MAPPED") {
      e.disposition = Disposition::Mapped;
      if (trim(text).empty()) throw ProtocolError(disposition_error(id, "MAPPED without Verus text"));
    } else if (disp == "MISSING") {
      e.disposition = Disposition::Missing;
    } else if (disp == "TRIVIAL") {
      e.disposition = Disposition::FilteredTrivial;
      if (trim(text).empty()) throw ProtocolError(disposition_error(id, "TRIVIAL without justification"));
    } else if (disp.starts_with("REDUNDANT")) {
      e.disposition = Disposition::FilteredRedundant;
      auto colon = disp.find(':');
      if (colon == std::string::npos) throw ProtocolError(disposition_error(id, "REDUNDANT without a kind"));
      e.redundancy = parse_redundancy_kind(std::string_view(disp).substr(colon + 1));
      if (!e.redundancy) throw ProtocolError(disposition_error(id, "unknown redundancy kind '" + disp.substr(colon + 1) + "'"));
      if (trim(text).empty()) throw ProtocolError(disposition_error(id, "REDUNDANT without justification"));
    } else {
      throw ProtocolError(disposition_error(id, "unknown disposition '" + disp + "'"));
    }
    by_node.emplace(id, std::move(e));  // a repeated row does not override the first
  }

  std::vector<MappingEntry> out;
  std::string missing;
  for (auto a : anchors) {
    auto it = by_node.find(a);
    if (it == by_node.end()) {
      missing += (missing.empty() ? "n" : ", n") + std::to_string(a);
      continue;
    }
    out.push_back(it->second);
  }
  if (!missing.empty()) throw ProtocolError("mapping has no row for " + missing);
  return out;
}

CheckerVerdict run_checker(const CheckerInput& input, AgentBackend& backend) {
  const auto& anchors = input.segments->anchors;
  if (anchors.empty()) return CheckerVerdict(input.category, {});
  auto mapping = ask(backend, checker_request(input),
                     [&](std::string_view text) { return parse_mapping(text, anchors); });
  return CheckerVerdict(input.category, std::move(mapping));
}

PruneResult apply_decisions(std::string_view candidate, std::string_view response) {
  auto sections = parse_sections(response);
  const auto* s = find_section(sections, "DECISIONS");
  if (!s) throw ProtocolError("missing DECISIONS section");

  // byte offset at which each line starts, plus one past the end
  std::vector<std::size_t> starts{0};
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (candidate[i] == '\n' && i + 1 < candidate.size()) starts.push_back(i + 1);
  const auto line_count = static_cast<std::uint32_t>(candidate.empty() ? 0 : starts.size());
  starts.push_back(candidate.size());

  PrunerDecision decision;
  for (auto row : table_rows(s->body)) {
    if (to_upper(row) == "NONE") continue;
    auto f = split_fields(row, 3);
    auto range = f[0];
    std::uint32_t a = 0, b = 0;
    auto parse_line = [](std::string_view t, std::uint32_t& v) {
      t = trim(t);
      if (!t.empty() && (t.front() == 'L' || t.front() == 'l')) t.remove_prefix(1);
      return parse_uint(t, v);
    };
    auto dash = range.find('-');
    bool ok = dash == std::string_view::npos ? parse_line(range, a)
                                             : parse_line(range.substr(0, dash), a) && parse_line(range.substr(dash + 1), b);
    if (dash == std::string_view::npos) b = a;
    if (!ok) throw ProtocolError("bad line range '" + std::string(range) + "'");
    if (a < 1 || b < a || b > line_count)
      throw ProtocolError("line range '" + std::string(range) + "' is outside L1-L" + std::to_string(line_count));
    if (f.size() < 3 || trim(f[2]).empty()) throw ProtocolError("removal of " + std::string(range) + " has no justification");

    Removal r{a, b, starts[a - 1], starts[b], RemovalClass::Trivial, std::nullopt, std::string(f[2])};
    auto cls = to_upper(f[1]);
    if (cls.starts_with("REDUNDANT")) {
      r.cls = RemovalClass::Redundant;
      if (auto colon = cls.find(':'); colon != std::string::npos) {
        r.redundancy = parse_redundancy_kind(std::string_view(cls).substr(colon + 1));
        if (!r.redundancy) throw ProtocolError("unknown redundancy kind in '" + std::string(row) + "'");
      }
    } else if (cls != "TRIVIAL") {
      throw ProtocolError("removal class must be TRIVIAL or REDUNDANT, got '" + std::string(f[1]) + "'");
    }
    decision.removals.push_back(std::move(r));
  }

  std::sort(decision.removals.begin(), decision.removals.end(),
            [](const Removal& x, const Removal& y) { return x.first_line < y.first_line; });
  for (std::size_t i = 1; i < decision.removals.size(); ++i)
    if (decision.removals[i].first_line <= decision.removals[i - 1].last_line)
      throw ProtocolError("overlapping removals at L" + std::to_string(decision.removals[i].first_line));

  PruneResult result;
  std::size_t pos = 0;
  for (const auto& r : decision.removals) {
    result.pruned.append(candidate.substr(pos, r.begin - pos));
    pos = r.end;
  }
  result.pruned.append(candidate.substr(pos));
  result.decision = std::move(decision);
  return result;
}

std::string restore_pruned(std::string_view pruned, const PrunerDecision& decision, std::string_view candidate) {
  std::string out;
  std::size_t from = 0;  // position in pruned
  std::size_t orig = 0;  // position in candidate
  for (const auto& r : decision.removals) {
    auto keep = r.begin - orig;
    out.append(pruned.substr(from, keep));
    from += keep;
    out.append(candidate.substr(r.begin, r.end - r.begin));
    orig = r.end;
  }
  out.append(pruned.substr(from));
  return out;
}

PruneResult run_pruner(std::string_view candidate, AgentBackend& backend) {
  if (trim(candidate).empty()) throw std::invalid_argument("pruner needs a non-empty candidate");
  return ask(backend, pruner_request(candidate), [&](std::string_view text) { return apply_decisions(candidate, text); });
}

std::string run_repair(std::string_view candidate, const VerusDiagnostics& diagnostics, AgentBackend& backend) {
  if (diagnostics.errors.empty() && diagnostics.raw_output.empty())
    throw std::invalid_argument("repair needs diagnostics");
  return ask(backend, repair_request(candidate, diagnostics), program_section);
}

JudgeVerdict run_judge(const std::vector<std::string>& ground_truth_blocks, std::string_view candidate_completion,
                       std::string_view program_context, AgentBackend& backend, std::string_view tag) {
  std::string truth;
  for (const auto& b : ground_truth_blocks) truth += b;
  if (trim(truth).empty()) throw std::invalid_argument("judge needs non-empty ground truth");

  // The fill may be raw text or keyed hole sections; compare both readings.
  auto keyed = verus::parse_completion(candidate_completion);
  keyed.erase("PROGRAM");
  std::vector<std::pair<std::string, std::string>> ordered(keyed.begin(), keyed.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
    return x.first.size() != y.first.size() ? x.first.size() < y.first.size() : x.first < y.first;
  });
  std::string fill;
  for (const auto& kv : ordered) fill += kv.second;

  auto norm_truth = verus::normalize_whitespace(truth);
  if (verus::normalize_whitespace(candidate_completion) == norm_truth ||
      (!keyed.empty() && verus::normalize_whitespace(fill) == norm_truth))
    return {true, "completion is identical to the ground truth up to whitespace"};
  if (trim(candidate_completion).empty() || (!keyed.empty() && trim(fill).empty()))
    return {false, "completion is empty"};

  auto request = judge_request(ground_truth_blocks, candidate_completion, program_context);
  request.tag = tag;
  return ask(backend, request,
             [](std::string_view text) -> JudgeVerdict {
               auto sections = parse_sections(text);
               const auto* v = find_section(sections, "VERDICT");
               const auto* r = find_section(sections, "RATIONALE");
               if (!v) throw ProtocolError("missing VERDICT section");
               auto verdict = to_upper(trim(v->body));
               bool correct;
               if (verdict.starts_with("CORRECT"))
                 correct = true;
               else if (verdict.starts_with("INCORRECT"))
                 correct = false;
               else
                 throw ProtocolError("VERDICT must be CORRECT or INCORRECT");
               if (!r || trim(r->body).empty()) throw ProtocolError("missing or empty RATIONALE");
               return {correct, std::string(trim(r->body))};
             });
}

}  // namespace vcot::agents
