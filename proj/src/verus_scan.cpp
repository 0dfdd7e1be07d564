#include <algorithm>
#include <cctype>
#include <string_view>

#include "vcot/error.hpp"
#include "vcot/verus_model.hpp"

namespace vcot::verus {

std::string_view to_string(RegionKind kind) {
  switch (kind) {
    case RegionKind::ExecCode: return "exec";
    case RegionKind::Spec: return "spec";
    case RegionKind::Invariant: return "invariant";
    case RegionKind::Assertion: return "assertion";
    case RegionKind::ProofBlock: return "proof-block";
    case RegionKind::LemmaFn: return "lemma-fn";
  }
  return "?";
}

namespace {

struct Token {
  enum class Kind : std::uint8_t { Ident, Punct, Literal, Lifetime };
  Kind kind;
  std::size_t begin;
  std::size_t end;
  std::uint32_t line;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
      } else if (c == '"') {
        auto start = pos_;
        auto start_line = line_;
        string_body(start_line);
        out.push_back({Token::Kind::Literal, start, pos_, start_line});
      } else if ((c == 'r' || c == 'b') && raw_or_byte_string(out)) {
        // handled
      } else if (c == '\'') {
        quote(out);
      } else if (ident_start(c)) {
        auto start = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
        out.push_back({Token::Kind::Ident, start, pos_, line_});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        auto start = pos_;
        while (pos_ < src_.size() && (ident_char(src_[pos_]) ||
                                      (src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))))
          ++pos_;
        out.push_back({Token::Kind::Literal, start, pos_, line_});
      } else {
        out.push_back({Token::Kind::Punct, pos_, pos_ + 1, line_});
        ++pos_;
      }
    }
    return out;
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void block_comment() {
    auto start_line = line_;
    int depth = 0;
    do {
      if (pos_ >= src_.size()) throw ScanError(start_line, "unterminated block comment");
      if (src_[pos_] == '/' && peek(1) == '*') {
        ++depth;
        pos_ += 2;
      } else if (src_[pos_] == '*' && peek(1) == '/') {
        --depth;
        pos_ += 2;
      } else {
        if (src_[pos_] == '\n') ++line_;
        ++pos_;
      }
    } while (depth > 0);
  }

  void string_body(std::uint32_t start_line) {
    ++pos_;  // opening quote
    while (pos_ < src_.size() && src_[pos_] != '"') {
      if (src_[pos_] == '\\') ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= src_.size()) throw ScanError(start_line, "unterminated string literal");
    ++pos_;
  }

  bool raw_or_byte_string(std::vector<Token>& out) {
    auto start = pos_;
    auto start_line = line_;
    std::size_t p = pos_;
    if (src_[p] == 'b') ++p;
    if (p < src_.size() && src_[p] == 'r') {
      ++p;
      std::size_t hashes = 0;
      while (p < src_.size() && src_[p] == '#') {
        ++hashes;
        ++p;
      }
      if (p >= src_.size() || src_[p] != '"') return false;
      ++p;
      for (;;) {
        if (p >= src_.size()) throw ScanError(start_line, "unterminated raw string");
        if (src_[p] == '\n') ++line_;
        if (src_[p] == '"') {
          std::size_t k = 0;
          while (k < hashes && p + 1 + k < src_.size() && src_[p + 1 + k] == '#') ++k;
          if (k == hashes) {
            p += 1 + hashes;
            break;
          }
        }
        ++p;
      }
      pos_ = p;
      out.push_back({Token::Kind::Literal, start, pos_, start_line});
      return true;
    }
    if (src_[pos_] == 'b' && p < src_.size() && src_[p] == '"') {
      pos_ = p;
      string_body(start_line);
      out.push_back({Token::Kind::Literal, start, pos_, start_line});
      return true;
    }
    return false;
  }

  void quote(std::vector<Token>& out) {
    auto start = pos_;
    // char literal: 'x', '\n', '\'', '\u{..}'
    if (peek(1) == '\\') {
      std::size_t p = pos_ + 2;
      while (p < src_.size() && src_[p] != '\'' && src_[p] != '\n') ++p;
      if (p < src_.size() && src_[p] == '\'') {
        pos_ = p + 1;
        out.push_back({Token::Kind::Literal, start, pos_, line_});
        return;
      }
    } else if (peek(1) != '\0' && peek(2) == '\'') {
      pos_ += 3;
      out.push_back({Token::Kind::Literal, start, pos_, line_});
      return;
    } else if (static_cast<unsigned char>(peek(1)) >= 0x80) {
      // multi-byte UTF-8 char literal
      std::size_t p = pos_ + 1;
      while (p < src_.size() && p < pos_ + 6 && src_[p] != '\'') ++p;
      if (p < src_.size() && src_[p] == '\'') {
        pos_ = p + 1;
        out.push_back({Token::Kind::Literal, start, pos_, line_});
        return;
      }
    }
    // lifetime or label
    ++pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    out.push_back({Token::Kind::Lifetime, start, pos_, line_});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::uint32_t line_ = 1;
};

bool is_open(char c) { return c == '(' || c == '[' || c == '{'; }
bool is_close(char c) { return c == ')' || c == ']' || c == '}'; }
char opener_for(char c) { return c == ')' ? '(' : c == ']' ? '[' : '{'; }

class RegionBuilder {
 public:
  RegionBuilder(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {
    match_delimiters();
  }

  std::vector<Region> run() {
    std::size_t i = 0;
    while (i < toks_.size()) i = step(i);
    flush_exec();
    return std::move(regions_);
  }

 private:
  std::string_view text(std::size_t i) const { return src_.substr(toks_[i].begin, toks_[i].end - toks_[i].begin); }
  bool punct(std::size_t i, char c) const {
    return i < toks_.size() && toks_[i].kind == Token::Kind::Punct && src_[toks_[i].begin] == c;
  }
  bool ident(std::size_t i, std::string_view s) const {
    return i < toks_.size() && toks_[i].kind == Token::Kind::Ident && text(i) == s;
  }
  bool open_at(std::size_t i) const { return i < toks_.size() && toks_[i].kind == Token::Kind::Punct && is_open(src_[toks_[i].begin]); }
  bool close_at(std::size_t i) const { return i < toks_.size() && toks_[i].kind == Token::Kind::Punct && is_close(src_[toks_[i].begin]); }

  void match_delimiters() {
    match_.assign(toks_.size(), static_cast<std::size_t>(-1));
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < toks_.size(); ++i) {
      if (toks_[i].kind != Token::Kind::Punct) continue;
      char c = src_[toks_[i].begin];
      if (is_open(c)) {
        stack.push_back(i);
      } else if (is_close(c)) {
        if (stack.empty()) throw ScanError(toks_[i].line, std::string("unmatched '") + c + "'");
        auto o = stack.back();
        if (src_[toks_[o].begin] != opener_for(c))
          throw ScanError(toks_[i].line, std::string("'") + c + "' closes '" + src_[toks_[o].begin] + "' opened on line " +
                                             std::to_string(toks_[o].line));
        stack.pop_back();
        match_[o] = i;
        match_[i] = o;
      }
    }
    if (!stack.empty())
      throw ScanError(toks_[stack.back()].line, std::string("unclosed '") + src_[toks_[stack.back()].begin] + "'");
  }

  // Identifiers used as keywords only when not a field/path/fn-name use.
  bool keyword_position(std::size_t i) const {
    if (i == 0) return true;
    if (punct(i - 1, '.')) return false;
    if (i >= 2 && punct(i - 1, ':') && punct(i - 2, ':')) return false;
    if (ident(i - 1, "fn") || ident(i - 1, "let") || ident(i - 1, "mut")) return false;
    if (punct(i + 1, '!') || punct(i + 1, ':') || punct(i + 1, '=')) {
      // `assert!`, `invariant: T`, `ensures = ...` are not clause keywords;
      // but `==` after a keyword is impossible, so a lone '=' is a binding
      if (!(punct(i + 1, '=') && punct(i + 2, '='))) return false;
    }
    return true;
  }

  static bool is_spec_clause(std::string_view s) {
    return s == "requires" || s == "ensures" || s == "recommends" || s == "decreases" || s == "returns" ||
           s == "opens_invariants" || s == "no_unwind";
  }
  static bool is_invariant_clause(std::string_view s) {
    return s == "invariant" || s == "invariant_except_break" || s == "invariant_ensures";
  }
  bool clause_keyword(std::size_t i) const {
    if (i >= toks_.size() || toks_[i].kind != Token::Kind::Ident) return false;
    auto s = text(i);
    return (is_spec_clause(s) || is_invariant_clause(s)) && keyword_position(i);
  }

  static bool is_fn_modifier(std::string_view s) {
    return s == "pub" || s == "proof" || s == "spec" || s == "exec" || s == "open" || s == "closed" ||
           s == "broadcast" || s == "const" || s == "unsafe" || s == "async" || s == "tracked" || s == "uninterp" ||
           s == "default";
  }

  struct FnHead {
    bool found = false;
    bool proof = false;
    bool spec = false;
    std::size_t fn_tok = 0;
  };

  // From an attribute or modifier at `i`, look for `fn` after any number of
  // attributes and modifiers (with `pub(crate)`/`spec(checked)` groups).
  FnHead fn_head(std::size_t i) const {
    FnHead head;
    std::size_t j = i;
    while (j < toks_.size()) {
      if (punct(j, '#') && punct(j + 1, '[')) {
        j = match_[j + 1] + 1;
        continue;
      }
      if (toks_[j].kind != Token::Kind::Ident) return head;
      auto s = text(j);
      if (s == "fn") {
        head.found = true;
        head.fn_tok = j;
        return head;
      }
      if (!is_fn_modifier(s)) return head;
      if (s == "proof") head.proof = true;
      if (s == "spec") head.spec = true;
      ++j;
      if (punct(j, '(')) j = match_[j] + 1;
    }
    return head;
  }

  // Index of the last token of a function item whose `fn` is at `fn_tok`.
  std::size_t fn_end(std::size_t fn_tok) const {
    for (std::size_t j = fn_tok + 1; j < toks_.size(); ++j) {
      if (punct(j, '{')) return match_[j];
      if (punct(j, ';')) return j;
      if (open_at(j)) {
        j = match_[j];
        continue;
      }
      if (close_at(j)) return j - 1;
    }
    return toks_.size() - 1;
  }

  // Last token of a clause list opened by the keyword at `kw`.
  std::size_t clause_end(std::size_t kw) const {
    std::size_t last = kw;
    for (std::size_t j = kw + 1; j < toks_.size(); ++j) {
      if (punct(j, '{') || punct(j, ';') || close_at(j) || clause_keyword(j)) return last;
      if (open_at(j)) j = match_[j];
      last = j;
    }
    return last;
  }

  // Last token of an `assert ...` / `assume ...` statement.
  std::size_t assertion_end(std::size_t kw) const {
    for (std::size_t j = kw + 1; j < toks_.size(); ++j) {
      if (punct(j, ';')) return j;
      if (close_at(j)) return j - 1;
      if (punct(j, '{')) {
        auto m = match_[j];
        return punct(m + 1, ';') ? m + 1 : m;
      }
      if (open_at(j)) j = match_[j];
    }
    return toks_.size() - 1;
  }

  void emit(RegionKind kind, std::size_t first, std::size_t last, std::optional<std::uint32_t> owner = {}) {
    flush_exec();
    push_region(kind, first, last, owner);
  }

  void push_region(RegionKind kind, std::size_t first, std::size_t last, std::optional<std::uint32_t> owner) {
    Region r;
    r.kind = kind;
    r.span.begin = toks_[first].begin;
    r.span.end = toks_[last].end;
    r.span.first_line = toks_[first].line;
    r.span.last_line = line_at(r.span.end - 1, toks_[last].line, toks_[last].begin);
    r.owner = owner;
    regions_.push_back(r);
  }

  // Line of byte `pos`, given that byte `base` is on `base_line`.
  std::uint32_t line_at(std::size_t pos, std::uint32_t base_line, std::size_t base) const {
    auto n = std::count(src_.begin() + static_cast<std::ptrdiff_t>(base), src_.begin() + static_cast<std::ptrdiff_t>(pos), '\n');
    return base_line + static_cast<std::uint32_t>(n);
  }

  void flush_exec() {
    if (!exec_first_) return;
    push_region(RegionKind::ExecCode, *exec_first_, exec_last_, std::nullopt);
    exec_first_.reset();
  }

  void exec(std::size_t i) {
    if (!exec_first_) exec_first_ = i;
    exec_last_ = i;
  }

  std::size_t step(std::size_t i) {
    const auto& t = toks_[i];
    if ((punct(i, '#') && punct(i + 1, '[')) || (t.kind == Token::Kind::Ident && is_fn_modifier(text(i)))) {
      auto head = fn_head(i);
      if (head.found && (head.proof || head.spec)) {
        auto last = fn_end(head.fn_tok);
        emit(head.proof ? RegionKind::LemmaFn : RegionKind::Spec, i, last);
        return last + 1;
      }
    }
    if (t.kind != Token::Kind::Ident || !keyword_position(i)) {
      exec(i);
      return i + 1;
    }
    auto s = text(i);
    if (s == "proof" && punct(i + 1, '{')) {
      auto last = match_[i + 1];
      emit(RegionKind::ProofBlock, i, last);
      return last + 1;
    }
    if (s == "assert" || s == "assume") {
      auto last = assertion_end(i);
      emit(RegionKind::Assertion, i, last);
      return last + 1;
    }
    if (is_invariant_clause(s)) {
      auto last = clause_end(i);
      emit(RegionKind::Invariant, i, last, loop_count_ == 0 ? std::nullopt : std::optional(loop_count_ - 1));
      return last + 1;
    }
    if (is_spec_clause(s)) {
      auto last = clause_end(i);
      emit(RegionKind::Spec, i, last);
      return last + 1;
    }
    if (s == "while" || s == "loop" || s == "for") ++loop_count_;
    exec(i);
    return i + 1;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::vector<std::size_t> match_;
  std::vector<Region> regions_;
  std::optional<std::size_t> exec_first_;
  std::size_t exec_last_ = 0;
  std::uint32_t loop_count_ = 0;
};

}  // namespace

VerusProgram annotate_regions(std::string source) {
  VerusProgram program;
  program.source = std::move(source);
  auto toks = Lexer(program.source).run();
  program.regions = RegionBuilder(program.source, std::move(toks)).run();
  return program;
}

}  // namespace vcot::verus
