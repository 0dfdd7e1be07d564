#include "vcot/sexpr.hpp"

#include <cctype>
#include <limits>

#include "vcot/error.hpp"

namespace vcot::sexpr {

std::vector<Index> Tree::children(Index i) const {
  std::vector<Index> out;
  out.reserve(nodes_[i].child_count);
  for (Index c = nodes_[i].first_child; c != kNone; c = nodes_[c].next_sibling) out.push_back(c);
  return out;
}

std::string_view Tree::head_atom(Index i) const {
  if (!is_list(i)) return {};
  Index h = nodes_[i].first_child;
  if (h == kNone || !is_atom(h)) return {};
  return source(h);
}

namespace {

bool is_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';' || c == '"';
}

struct OpenList {
  Index node;
  Index last_child = kNone;
};

}  // namespace

Tree parse(std::string_view text) {
  if (text.size() >= std::numeric_limits<std::uint32_t>::max()) throw ParseError(1, "input too large");

  Tree tree;
  tree.text_ = text;
  std::vector<OpenList> stack;
  std::uint32_t line = 1;

  auto attach = [&](Index child) {
    if (stack.empty()) {
      tree.roots_.push_back(child);
      return;
    }
    auto& open = stack.back();
    auto& parent = tree.nodes_[open.node];
    if (open.last_child == kNone)
      parent.first_child = child;
    else
      tree.nodes_[open.last_child].next_sibling = child;
    open.last_child = child;
    ++parent.child_count;
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      while (i < n && text[i] != '\n') ++i;
    } else if (c == '(') {
      Index id = static_cast<Index>(tree.nodes_.size());
      tree.nodes_.push_back({Node::Kind::List, static_cast<std::uint32_t>(i), 0, line});
      attach(id);
      stack.push_back({id});
      ++i;
    } else if (c == ')') {
      if (stack.empty()) throw ParseError(line, "unbalanced parentheses: unexpected ')'");
      tree.nodes_[stack.back().node].end = static_cast<std::uint32_t>(i + 1);
      stack.pop_back();
      ++i;
    } else {
      std::size_t start = i;
      std::uint32_t start_line = line;
      if (c == '|') {
        ++i;
        while (i < n && text[i] != '|') {
          if (text[i] == '\n') ++line;
          ++i;
        }
        if (i >= n) throw ParseError(start_line, "unterminated quoted symbol");
        ++i;
      } else if (c == '"') {
        ++i;
        for (;;) {
          if (i >= n) throw ParseError(start_line, "unterminated string literal");
          if (text[i] == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              i += 2;
              continue;
            }
            ++i;
            break;
          }
          if (text[i] == '\n') ++line;
          ++i;
        }
      } else {
        while (i < n && !is_delimiter(text[i])) {
          if (text[i] == '|') {
            // symbols like a|b|c are unusual but legal inside Z3 names
            ++i;
            while (i < n && text[i] != '|') {
              if (text[i] == '\n') ++line;
              ++i;
            }
            if (i < n) ++i;
            continue;
          }
          ++i;
        }
      }
      Index id = static_cast<Index>(tree.nodes_.size());
      tree.nodes_.push_back(
          {Node::Kind::Atom, static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(i), start_line});
      attach(id);
    }
  }
  if (!stack.empty())
    throw ParseError(tree.nodes_[stack.back().node].line, "unbalanced parentheses: '(' is never closed");
  return tree;
}

}  // namespace vcot::sexpr
