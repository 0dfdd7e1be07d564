#include "vcot/z3proof.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "vcot/error.hpp"
#include "vcot/sexpr.hpp"
#include "vcot/util.hpp"

namespace vcot::z3proof {

const ProofNode& ProofDocument::node(NodeId id) const {
  if (!contains(id)) throw NodeNotFound(id);
  return nodes_[id];
}

void ProofDocument::finish() {
  std::vector<bool> used(nodes_.size(), false);
  for (const auto& n : nodes_)
    for (auto p : n.premises) used[p] = true;
  roots_.clear();
  for (NodeId i = 0; i < nodes_.size(); ++i)
    if (!used[i]) roots_.push_back(i);
}

ProofDocument ProofDocument::from_nodes(std::vector<ProofNode> nodes) {
  ProofDocument doc;
  for (NodeId i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != i) throw std::invalid_argument("node ids must be dense and ordered");
    if (nodes[i].rule.empty()) throw std::invalid_argument("empty rule name");
    for (auto p : nodes[i].premises)
      if (p >= i) throw std::invalid_argument("premise must precede its user");
  }
  doc.nodes_ = std::move(nodes);
  doc.finish();
  return doc;
}

namespace {

bool is_term_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')';
}

void expand_into(const std::unordered_map<std::string, std::string>& bindings, std::string_view term,
                 std::size_t budget, int depth, std::string& out) {
  std::size_t i = 0;
  while (i < term.size()) {
    if (is_term_delimiter(term[i])) {
      out.push_back(term[i++]);
      continue;
    }
    std::size_t start = i;
    while (i < term.size() && !is_term_delimiter(term[i])) ++i;
    std::string_view tok = term.substr(start, i - start);
    auto it = (tok.front() == '$' || tok.front() == '?') ? bindings.find(std::string(tok)) : bindings.end();
    if (it != bindings.end() && depth < 64 && out.size() + it->second.size() + (term.size() - i) <= budget) {
      expand_into(bindings, it->second, budget, depth + 1, out);
    } else {
      out.append(tok);
    }
  }
}

bool is_declaration(std::string_view head) {
  static constexpr std::string_view kSkip[] = {"set-logic",   "set-option",  "set-info",   "declare-fun",
                                               "declare-const", "declare-sort", "define-fun", "define-sort",
                                               "define-const", "declare-datatypes", "declare-datatype"};
  return std::find(std::begin(kSkip), std::end(kSkip), head) != std::end(kSkip);
}

class Interpreter {
 public:
  explicit Interpreter(const sexpr::Tree& tree) : tree_(tree) {}

  std::vector<ProofNode> nodes;
  std::unordered_map<std::string, NodeId> bindings;
  std::unordered_map<std::string, std::string> term_bindings;

  void top_level(sexpr::Index i) {
    if (tree_.is_atom(i)) return;  // `unsat`, `sat`, stray symbols
    auto head = tree_.node(i).first_child;
    if (head == sexpr::kNone) return;
    if (tree_.is_list(head) && tree_.head_atom(head) != "_") {
      for (auto c : tree_.children(i)) top_level(c);
      return;
    }
    auto name = tree_.head_atom(i);
    if (is_declaration(name)) return;
    if (name == "proof") {
      auto kids = tree_.children(i);
      for (std::size_t k = 1; k < kids.size(); ++k) proof(kids[k]);
      return;
    }
    if (name == "error") throw ParseError(tree_.node(i).line, "solver reported an error: " + std::string(tree_.source(i)));
    proof(i);
  }

 private:
  enum class FrameKind { Enter, Let, RuleApp };

  struct Frame {
    FrameKind kind = FrameKind::Enter;
    sexpr::Index expr = sexpr::kNone;
    std::vector<sexpr::Index> items;  // Let: binding pairs; RuleApp: premise exprs
    std::size_t cursor = 0;
    bool awaiting = false;
    bool body_pushed = false;
    sexpr::Index body = sexpr::kNone;
    std::string pending_name;
    std::string rule;
    std::uint32_t rule_line = 0;
    sexpr::Index conclusion = sexpr::kNone;
    std::vector<NodeId> premises;
  };

  static Frame enter(sexpr::Index e) {
    Frame f;
    f.kind = FrameKind::Enter;
    f.expr = e;
    return f;
  }

  std::uint32_t line_of(sexpr::Index i) const { return tree_.node(i).line; }

  NodeId lookup_proof(sexpr::Index atom) const {
    std::string name(tree_.source(atom));
    auto it = bindings.find(name);
    if (it == bindings.end()) throw ParseError(line_of(atom), "unknown binding reference '" + name + "'");
    return it->second;
  }

  void bind_term(sexpr::Index name_atom, sexpr::Index value) {
    std::string name(tree_.source(name_atom));
    std::string text(tree_.source(value));
    auto [it, inserted] = term_bindings.emplace(name, text);
    if (!inserted && it->second != text)
      throw ParseError(line_of(name_atom), "binding '" + name + "' defined twice with different terms");
  }

  void bind_proof(const std::string& name, NodeId id, std::uint32_t line) {
    if (!bindings.emplace(name, id).second) throw ParseError(line, "duplicate proof binding '" + name + "'");
  }

  // Walks one proof-position expression without recursion.
  NodeId proof(sexpr::Index root) {
    std::vector<Frame> stack;
    stack.push_back(enter(root));
    NodeId result = 0;

    while (!stack.empty()) {
      Frame& f = stack.back();
      switch (f.kind) {
        case FrameKind::Enter: {
          auto e = f.expr;
          if (tree_.is_atom(e)) {
            auto text = tree_.source(e);
            if (text.empty() || text.front() != '@')
              throw ParseError(line_of(e), "expected a proof, found '" + std::string(text) + "'");
            result = lookup_proof(e);
            stack.pop_back();
            break;
          }
          auto kids = tree_.children(e);
          if (kids.empty()) throw ParseError(line_of(e), "empty rule application");
          if (tree_.head_atom(e) == "let") {
            if (kids.size() != 3 || !tree_.is_list(kids[1]))
              throw ParseError(line_of(e), "malformed let: expected (let (bindings) body)");
            f.kind = FrameKind::Let;
            f.items = tree_.children(kids[1]);
            f.body = kids[2];
            break;
          }
          std::string rule;
          std::uint32_t rule_line;
          if (tree_.is_atom(kids[0])) {
            rule = std::string(tree_.source(kids[0]));
            rule_line = line_of(kids[0]);
          } else {
            // indexed head: ((_ th-lemma arith farkas 1 1) ...)
            auto head = tree_.children(kids[0]);
            if (head.size() < 2 || tree_.source(head[0]) != "_" || !tree_.is_atom(head[1]))
              throw ParseError(line_of(kids[0]), "malformed rule head");
            rule = std::string(tree_.source(head[1]));
            rule_line = line_of(head[1]);
          }
          if (kids.size() < 2) throw ParseError(rule_line, "rule '" + rule + "' has no conclusion");
          f.kind = FrameKind::RuleApp;
          f.rule = std::move(rule);
          f.rule_line = rule_line;
          f.items.assign(kids.begin() + 1, kids.end() - 1);
          f.conclusion = kids.back();
          break;
        }
        case FrameKind::Let: {
          if (f.awaiting) {
            bind_proof(f.pending_name, result, line_of(f.items[f.cursor]));
            f.awaiting = false;
            ++f.cursor;
          }
          if (f.cursor < f.items.size()) {
            auto pair = f.items[f.cursor];
            auto parts = tree_.is_list(pair) ? tree_.children(pair) : std::vector<sexpr::Index>{};
            if (parts.size() != 2 || !tree_.is_atom(parts[0]))
              throw ParseError(line_of(pair), "malformed let binding");
            auto name = tree_.source(parts[0]);
            if (!name.empty() && name.front() == '@') {
              f.pending_name = std::string(name);
              f.awaiting = true;
              auto value = parts[1];
              stack.push_back(enter(value));
            } else {
              bind_term(parts[0], parts[1]);
              ++f.cursor;
            }
            break;
          }
          if (!f.body_pushed) {
            f.body_pushed = true;
            auto body = f.body;
            stack.push_back(enter(body));
            break;
          }
          stack.pop_back();  // result is the body's
          break;
        }
        case FrameKind::RuleApp: {
          if (f.awaiting) {
            f.premises.push_back(result);
            f.awaiting = false;
            ++f.cursor;
          }
          if (f.cursor < f.items.size()) {
            f.awaiting = true;
            auto next = f.items[f.cursor];
            stack.push_back(enter(next));
            break;
          }
          auto concl = tree_.source(f.conclusion);
          if (tree_.is_atom(f.conclusion) && concl.front() == '$' && !term_bindings.count(std::string(concl)))
            throw ParseError(line_of(f.conclusion), "unknown binding reference '" + std::string(concl) + "'");
          if (tree_.is_atom(f.conclusion) && concl.front() == '@')
            throw ParseError(line_of(f.conclusion), "rule '" + f.rule + "' concludes a proof, expected a term");
          NodeId id = static_cast<NodeId>(nodes.size());
          nodes.push_back({id, std::move(f.rule), std::move(f.premises), std::string(concl), f.rule_line});
          result = id;
          stack.pop_back();
          break;
        }
      }
    }
    return result;
  }

  const sexpr::Tree& tree_;
};

}  // namespace

std::string ProofDocument::expand(std::string_view term, std::size_t budget) const {
  std::string out;
  expand_into(term_bindings_, term, budget, 0, out);
  return out;
}

ProofDocument parse_proof(std::string_view trace_text) {
  if (trim(trace_text).empty()) throw ParseError(1, "empty input");
  auto tree = sexpr::parse(trace_text);
  Interpreter interp(tree);
  for (auto r : tree.roots()) interp.top_level(r);
  if (interp.nodes.empty()) throw ParseError(1, "no proof found in input");

  ProofDocument doc;
  doc.nodes_ = std::move(interp.nodes);
  doc.bindings_ = std::move(interp.bindings);
  doc.term_bindings_ = std::move(interp.term_bindings);
  doc.finish();
  return doc;
}

ProofSegment dependency_subtree(const ProofDocument& doc, NodeId anchor) {
  if (!doc.contains(anchor)) throw NodeNotFound(anchor);
  std::vector<bool> seen(doc.size(), false);
  std::vector<NodeId> work{anchor};
  seen[anchor] = true;
  while (!work.empty()) {
    auto n = work.back();
    work.pop_back();
    for (auto p : doc.nodes()[n].premises) {
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
    }
  }
  ProofSegment seg{anchor, {}};
  for (NodeId i = 0; i <= anchor; ++i)
    if (seen[i]) seg.members.push_back(i);
  return seg;
}

AggregatedSegments aggregate_segments(const ProofDocument& doc, RuleCategory category) {
  AggregatedSegments agg{category, {}, {}};
  std::vector<bool> seen(doc.size(), false);
  std::vector<NodeId> work;
  for (const auto& n : doc.nodes()) {
    if (categorize_rule(n.rule) != category) continue;
    agg.anchors.push_back(n.id);
    if (!seen[n.id]) {
      seen[n.id] = true;
      work.push_back(n.id);
    }
  }
  while (!work.empty()) {
    auto n = work.back();
    work.pop_back();
    for (auto p : doc.nodes()[n].premises) {
      if (!seen[p]) {
        seen[p] = true;
        work.push_back(p);
      }
    }
  }
  for (NodeId i = 0; i < doc.size(); ++i)
    if (seen[i]) agg.members.push_back(i);
  return agg;
}

std::vector<RuleLevel> annotate_levels(const ProofDocument& doc, bool lenient) {
  std::vector<RuleLevel> levels;
  levels.reserve(doc.size());
  for (const auto& n : doc.nodes()) levels.push_back(classify_rule(n.rule, lenient));
  return levels;
}

ProofStats proof_stats(const ProofDocument& doc, std::string_view trace_text, bool lenient) {
  ProofStats stats;
  stats.node_count = doc.size();
  stats.trace_line_count = count_lines(trace_text);
  for (const auto& n : doc.nodes()) {
    ++stats.levels[static_cast<std::size_t>(classify_rule(n.rule, lenient))].count;
    ++stats.per_rule[n.rule];
  }
  if (stats.node_count > 0) {
    for (auto& l : stats.levels)
      l.share = static_cast<double>(l.count) / static_cast<double>(stats.node_count);
  }
  return stats;
}

}  // namespace vcot::z3proof
