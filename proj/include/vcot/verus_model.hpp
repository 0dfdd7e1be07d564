#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vcot::verus {

/// Half-open byte interval plus the 1-based inclusive line interval it touches.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::uint32_t first_line = 0;
  std::uint32_t last_line = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

enum class RegionKind : std::uint8_t { ExecCode, Spec, Invariant, Assertion, ProofBlock, LemmaFn };

std::string_view to_string(RegionKind kind);

struct Region {
  RegionKind kind;
  Span span;
  /// Loop ordinal for Invariant regions.
  std::optional<std::uint32_t> owner;
};

struct VerusProgram {
  std::string source;
  std::vector<Region> regions;  // non-overlapping, ascending

  std::string_view text(const Span& s) const { return std::string_view(source).substr(s.begin, s.end - s.begin); }
};

/// Lexical scan of a Verus source file into regions. Throws ScanError on
/// unbalanced braces, brackets, or parentheses.
VerusProgram annotate_regions(std::string source);

using BlockId = std::uint32_t;

enum class BlockKind : std::uint8_t { LemmaBlock, InvariantBlock, AssertionBlock };

std::string_view to_string(BlockKind kind);
std::optional<BlockKind> parse_block_kind(std::string_view name);

struct SemanticBlock {
  BlockId id;  // equal to order_index
  BlockKind kind;
  std::vector<Span> spans;
  std::uint32_t order_index;
};

/// Groups proof-hint regions into blocks: one per lemma function, one per
/// loop's invariant clauses, one per maximal run of assertions and proof
/// blocks with no other region between them.
std::vector<SemanticBlock> segment_blocks(const VerusProgram& program);

struct Hole {
  std::string key;  // "1", "2", ... in masked-source order
  BlockId block_id;
  BlockKind block_kind;
  std::size_t offset;         // insertion point in the masked source
  std::size_t marker_length;  // bytes of marker text at `offset`, 0 without markers
  bool whole_lines;           // removal took whole lines (fill gets a trailing newline)
  std::string original_text;
  Span original_span;
};

struct MaskedProgram {
  std::string source;
  std::vector<Hole> holes;  // ascending offset
  bool markers = false;
};

struct RemovalOptions {
  bool markers = false;
};

std::string hole_marker(std::string_view key);

MaskedProgram remove_blocks(const VerusProgram& program, const std::vector<SemanticBlock>& blocks,
                            const std::set<BlockId>& block_ids, RemovalOptions options = {});
MaskedProgram remove_blocks(const VerusProgram& program, const std::set<BlockId>& block_ids,
                            RemovalOptions options = {});

/// Ground-truth text per removed block (its holes' text, concatenated).
std::map<BlockId, std::string> ground_truth_by_block(const MaskedProgram& masked);

/// Completion text with one keyed section per hole (`### HOLE 3` + fenced body).
std::string format_completion(const std::map<std::string, std::string>& fills);
std::string ground_truth_completion(const MaskedProgram& masked);

/// Parses a keyed completion. Returns hole fills by key; a `PROGRAM`
/// section, if present, is returned under the key "PROGRAM".
std::map<std::string, std::string> parse_completion(std::string_view completion);

/// Inserts fills at the recorded hole positions. Throws MissingHoleKey.
std::string splice_completion(const MaskedProgram& masked, const std::map<std::string, std::string>& fills);
std::string splice_completion(const MaskedProgram& masked, std::string_view completion);

/// Strips trailing whitespace on every line, collapses runs of blank lines
/// to one, and drops blank lines at both ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace vcot::verus
