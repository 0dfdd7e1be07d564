#include <algorithm>
#include <charconv>

#include "vcot/error.hpp"
#include "vcot/sections.hpp"
#include "vcot/util.hpp"
#include "vcot/verus_model.hpp"

namespace vcot::verus {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::LemmaBlock: return "lemma";
    case BlockKind::InvariantBlock: return "invariant";
    case BlockKind::AssertionBlock: return "assertion";
  }
  return "?";
}

std::optional<BlockKind> parse_block_kind(std::string_view name) {
  auto n = to_lower(name);
  if (n == "lemma") return BlockKind::LemmaBlock;
  if (n == "invariant") return BlockKind::InvariantBlock;
  if (n == "assertion") return BlockKind::AssertionBlock;
  return std::nullopt;
}

std::vector<SemanticBlock> segment_blocks(const VerusProgram& program) {
  std::vector<SemanticBlock> blocks;
  std::map<std::uint32_t, std::size_t> by_loop;  // loop ordinal -> index in blocks
  bool in_assertion_run = false;

  for (const auto& r : program.regions) {
    switch (r.kind) {
      case RegionKind::LemmaFn:
        blocks.push_back({0, BlockKind::LemmaBlock, {r.span}, 0});
        in_assertion_run = false;
        break;
      case RegionKind::Invariant: {
        auto loop = r.owner.value_or(UINT32_MAX);
        auto it = by_loop.find(loop);
        if (it == by_loop.end()) {
          by_loop.emplace(loop, blocks.size());
          blocks.push_back({0, BlockKind::InvariantBlock, {r.span}, 0});
        } else {
          blocks[it->second].spans.push_back(r.span);
        }
        in_assertion_run = false;
        break;
      }
      case RegionKind::Assertion:
      case RegionKind::ProofBlock:
        if (in_assertion_run)
          blocks.back().spans.push_back(r.span);
        else
          blocks.push_back({0, BlockKind::AssertionBlock, {r.span}, 0});
        in_assertion_run = true;
        break;
      case RegionKind::ExecCode:
      case RegionKind::Spec:
        in_assertion_run = false;
        break;
    }
  }

  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const SemanticBlock& a, const SemanticBlock& b) { return a.spans.front().begin < b.spans.front().begin; });
  for (std::uint32_t i = 0; i < blocks.size(); ++i) {
    blocks[i].id = i;
    blocks[i].order_index = i;
  }
  return blocks;
}

std::string hole_marker(std::string_view key) { return "/* PROOF HOLE " + std::string(key) + " */"; }

namespace {

bool blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

struct Cut {
  std::size_t begin;
  std::size_t end;
  BlockId block;
  BlockKind kind;
  bool whole_lines;
  Span original;
};

// Grows [begin,end) to whole lines when nothing else shares those lines.
Cut widen(const std::string& src, Span s, BlockId block, BlockKind kind) {
  std::size_t b = s.begin;
  while (b > 0 && blank(src[b - 1])) --b;
  std::size_t e = s.end;
  while (e < src.size() && blank(src[e])) ++e;
  bool line_start = b == 0 || src[b - 1] == '\n';
  bool line_end = e == src.size() || src[e] == '\n';
  if (line_start && line_end) {
    if (e < src.size()) ++e;  // take the newline
    return {b, e, block, kind, true, s};
  }
  return {s.begin, s.end, block, kind, false, s};
}

}  // namespace

MaskedProgram remove_blocks(const VerusProgram& program, const std::vector<SemanticBlock>& blocks,
                            const std::set<BlockId>& block_ids, RemovalOptions options) {
  for (auto id : block_ids) {
    auto it = std::find_if(blocks.begin(), blocks.end(), [&](const SemanticBlock& b) { return b.id == id; });
    if (it == blocks.end()) throw UnknownBlock(id);
  }

  // Spans of a block that are only separated by whitespace or comments
  // become a single hole; anything with a region in between stays apart.
  std::vector<Cut> cuts;
  for (const auto& block : blocks) {
    if (!block_ids.count(block.id)) continue;
    std::vector<Span> merged;
    for (const auto& s : block.spans) {
      if (!merged.empty()) {
        auto gap_begin = merged.back().end;
        bool region_between = std::any_of(program.regions.begin(), program.regions.end(), [&](const Region& r) {
          return r.span.begin >= gap_begin && r.span.end <= s.begin;
        });
        if (!region_between) {
          merged.back().end = s.end;
          merged.back().last_line = s.last_line;
          continue;
        }
      }
      merged.push_back(s);
    }
    for (const auto& s : merged) cuts.push_back(widen(program.source, s, block.id, block.kind));
  }
  std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.begin < b.begin; });

  MaskedProgram masked;
  masked.markers = options.markers;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const auto& c = cuts[i];
    masked.source.append(program.source, pos, c.begin - pos);
    Hole h;
    h.key = std::to_string(i + 1);
    h.block_id = c.block;
    h.block_kind = c.kind;
    h.offset = masked.source.size();
    h.whole_lines = c.whole_lines;
    h.original_text = program.source.substr(c.begin, c.end - c.begin);
    h.original_span = c.original;
    h.marker_length = 0;
    if (options.markers) {
      std::string marker;
      if (c.whole_lines) {
        // keep the removed text's indentation so the marker sits in place
        std::size_t k = c.begin;
        while (k < c.end && blank(program.source[k])) marker.push_back(program.source[k++]);
        marker += hole_marker(h.key);
        marker += '\n';
      } else {
        marker = hole_marker(h.key);
      }
      masked.source += marker;
      h.marker_length = marker.size();
    }
    masked.holes.push_back(std::move(h));
    pos = c.end;
  }
  masked.source.append(program.source, pos);
  return masked;
}

MaskedProgram remove_blocks(const VerusProgram& program, const std::set<BlockId>& block_ids, RemovalOptions options) {
  return remove_blocks(program, segment_blocks(program), block_ids, options);
}

std::map<BlockId, std::string> ground_truth_by_block(const MaskedProgram& masked) {
  std::map<BlockId, std::string> out;
  for (const auto& h : masked.holes) out[h.block_id] += h.original_text;
  return out;
}

namespace {

bool numeric_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

std::string format_completion(const std::map<std::string, std::string>& fills) {
  std::vector<std::string> keys;
  for (const auto& [k, _] : fills) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), numeric_less);
  std::string out;
  for (const auto& k : keys) {
    if (!out.empty()) out += '\n';
    out += render_section(k == "PROGRAM" ? k : "HOLE " + k, fills.at(k), "rust");
  }
  return out;
}

std::string ground_truth_completion(const MaskedProgram& masked) {
  std::map<std::string, std::string> fills;
  for (const auto& h : masked.holes) fills[h.key] = h.original_text;
  return format_completion(fills);
}

std::map<std::string, std::string> parse_completion(std::string_view completion) {
  std::map<std::string, std::string> out;
  for (const auto& s : parse_sections(completion)) {
    if (s.name == "PROGRAM") {
      out.emplace("PROGRAM", s.body);
      continue;
    }
    std::string_view n = s.name;
    if (!n.starts_with("HOLE")) continue;
    n.remove_prefix(4);
    while (!n.empty() && (n.front() == ' ' || n.front() == '-' || n.front() == '#')) n.remove_prefix(1);
    unsigned value = 0;
    auto [p, ec] = std::from_chars(n.data(), n.data() + n.size(), value);
    if (ec != std::errc{} || p != n.data() + n.size()) continue;
    out.emplace(std::to_string(value), s.body);  // first section for a key wins
  }
  return out;
}

std::string splice_completion(const MaskedProgram& masked, const std::map<std::string, std::string>& fills) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& h : masked.holes) {
    auto it = fills.find(h.key);
    if (it == fills.end()) throw MissingHoleKey(h.key);
    out.append(masked.source, pos, h.offset - pos);
    std::string_view fill = it->second;
    if (h.whole_lines) {
      out += fill;
      if (!fill.empty() && fill.back() != '\n') out += '\n';
    } else {
      // an inline hole: the fenced body's closing newline is not part of the fill
      while (!fill.empty() && fill.back() == '\n') fill.remove_suffix(1);
      out += fill;
    }
    pos = h.offset + h.marker_length;
  }
  out.append(masked.source, pos);
  return out;
}

std::string splice_completion(const MaskedProgram& masked, std::string_view completion) {
  auto fills = parse_completion(completion);
  bool has_hole_section = std::any_of(fills.begin(), fills.end(), [](const auto& kv) { return kv.first != "PROGRAM"; });
  if (!has_hole_section && fills.count("PROGRAM") && !masked.holes.empty()) return fills.at("PROGRAM");
  return splice_completion(masked, fills);
}

std::string normalize_whitespace(std::string_view text) {
  std::vector<std::string> lines;
  for (auto line : split_lines(text)) {
    while (!line.empty() && (blank(line.back()) || line.back() == '\n')) line.remove_suffix(1);
    if (line.empty() && (lines.empty() || lines.back().empty())) continue;
    lines.emplace_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace vcot::verus
