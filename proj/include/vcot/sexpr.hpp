#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace vcot::sexpr {

using Index = std::uint32_t;
inline constexpr Index kNone = static_cast<Index>(-1);

struct Node {
  enum class Kind : std::uint8_t { Atom, List };
  Kind kind;
  std::uint32_t begin;  // byte offset of the first character (the '(' for lists)
  std::uint32_t end;    // one past the last character (past ')' for lists)
  std::uint32_t line;   // 1-based line of `begin`
  Index first_child = kNone;
  Index next_sibling = kNone;
  std::uint32_t child_count = 0;
};

/// Flat arena of S-expressions over a borrowed text buffer. Parsing is
/// iterative, so nesting depth is bounded only by memory; Z3 emits let
/// chains thousands of levels deep.
class Tree {
 public:
  std::string_view text() const { return text_; }
  const std::vector<Index>& roots() const { return roots_; }
  const Node& node(Index i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }

  std::string_view source(Index i) const { return text_.substr(nodes_[i].begin, nodes_[i].end - nodes_[i].begin); }
  bool is_atom(Index i) const { return nodes_[i].kind == Node::Kind::Atom; }
  bool is_list(Index i) const { return nodes_[i].kind == Node::Kind::List; }

  /// Children of a list, in order.
  std::vector<Index> children(Index i) const;

  /// Atom text of the list head, or empty when the head is missing or a list.
  std::string_view head_atom(Index i) const;

 private:
  friend Tree parse(std::string_view text);
  std::string_view text_;
  std::vector<Node> nodes_;
  std::vector<Index> roots_;
};

/// Throws ParseError on unbalanced parentheses or unterminated literals.
Tree parse(std::string_view text);

}  // namespace vcot::sexpr
