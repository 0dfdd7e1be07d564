#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "vcot/error.hpp"
#include "vcot/util.hpp"
#include "vcot/verus_model.hpp"
#include "support/random_program.hpp"

using namespace vcot;
using namespace vcot::verus;

namespace {

std::string fixture(const std::string& rel) { return read_file(std::string(VCOT_FIXTURES) + "/" + rel); }

std::vector<std::string> fixture_programs() {
  std::vector<std::string> out{fixture("programs/replace_last.rs")};
  std::vector<std::filesystem::path> corpus;
  for (const auto& e : std::filesystem::directory_iterator(std::string(VCOT_FIXTURES) + "/corpus")) corpus.push_back(e.path());
  std::sort(corpus.begin(), corpus.end());
  for (const auto& p : corpus) out.push_back(read_file(p));
  return out;
}

std::vector<const Region*> regions_of(const VerusProgram& p, RegionKind k) {
  std::vector<const Region*> out;
  for (const auto& r : p.regions)
    if (r.kind == k) out.push_back(&r);
  return out;
}

const SemanticBlock* block_at_line(const std::vector<SemanticBlock>& blocks, std::uint32_t line) {
  for (const auto& b : blocks)
    for (const auto& s : b.spans)
      if (s.first_line <= line && line <= s.last_line) return &b;
  return nullptr;
}

}  // namespace

TEST_SUITE("annotate_regions") {
  TEST_CASE("worked example region lines") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));

    auto inv = regions_of(p, RegionKind::Invariant);
    REQUIRE(inv.size() == 2);
    CHECK(inv[1]->span.first_line == 38);
    CHECK(inv[1]->span.last_line == 42);
    CHECK(inv[0]->owner != inv[1]->owner);

    auto lemmas = regions_of(p, RegionKind::LemmaFn);
    REQUIRE(lemmas.size() == 1);
    CHECK(lemmas[0]->span.first_line == 65);
    CHECK(lemmas[0]->span.last_line == 70);

    std::uint32_t lo = UINT32_MAX, hi = 0;
    for (const auto& r : p.regions) {
      if (r.kind != RegionKind::Assertion && r.kind != RegionKind::ProofBlock) continue;
      if (r.span.first_line < 47 || r.span.first_line > 61) continue;
      lo = std::min(lo, r.span.first_line);
      hi = std::max(hi, r.span.last_line);
    }
    CHECK(lo == 47);
    CHECK(hi == 61);

    // requires/ensures are specs, the loop body is executable code
    CHECK(regions_of(p, RegionKind::Spec).size() >= 2);
    bool push_is_exec = false;
    for (const auto& r : regions_of(p, RegionKind::ExecCode))
      if (p.text(r->span).find("replaced_list.push(second[index])") != std::string_view::npos) push_is_exec = true;
    CHECK(push_is_exec);
  }

  TEST_CASE("regions are ordered, disjoint and in bounds") {
    for (const auto& src : fixture_programs()) {
      auto p = annotate_regions(src);
      for (std::size_t i = 0; i < p.regions.size(); ++i) {
        const auto& s = p.regions[i].span;
        CHECK(s.begin < s.end);
        CHECK(s.end <= p.source.size());
        CHECK(s.first_line <= s.last_line);
        if (i > 0) CHECK(p.regions[i - 1].span.end <= s.begin);
      }
    }
  }

  TEST_CASE("program without hints has only exec and spec regions") {
    auto p = annotate_regions("fn id(x: u8) -> (r: u8)\n    ensures r == x,\n{\n    x\n}\n");
    REQUIRE_FALSE(p.regions.empty());
    for (const auto& r : p.regions) CHECK((r.kind == RegionKind::ExecCode || r.kind == RegionKind::Spec));
  }

  TEST_CASE("unbalanced delimiters") {
    CHECK_THROWS_AS(annotate_regions("fn f() {\n    let x = (1;\n"), ScanError);
    try {
      annotate_regions("fn f() {\n  if x {\n    y\n}\n");
      FAIL("expected ScanError");
    } catch (const ScanError& e) {
      CHECK(e.line() == 1);
    }
    try {
      annotate_regions("fn f() {\n  g(];\n}\n");
      FAIL("expected ScanError");
    } catch (const ScanError& e) {
      CHECK(e.line() == 2);
    }
  }

  TEST_CASE("braces in comments, strings and chars are ignored") {
    auto p = annotate_regions("fn f() {\n  // }\n  /* { /* } */ */\n  let s = \"}\";\n  let c = '{';\n  let r = r#\"}\"#;\n  assert(true);\n}\n");
    CHECK(regions_of(p, RegionKind::Assertion).size() == 1);
  }

  TEST_CASE("macro and field uses are not hints") {
    auto p = annotate_regions("fn f(a: A) {\n  assert!(a.ok);\n  let q = a.invariant;\n  a.ensures();\n}\n");
    CHECK(regions_of(p, RegionKind::Assertion).empty());
    CHECK(regions_of(p, RegionKind::Invariant).empty());
    CHECK(regions_of(p, RegionKind::Spec).empty());
  }

  TEST_CASE("spec functions and attributed proof functions") {
    auto p = annotate_regions(
        "spec fn double(x: int) -> int { 2 * x }\n\n#[verifier::spinoff_prover]\npub proof fn lemma_d(x: int)\n    ensures double(x) == x + x,\n{\n}\n");
    auto specs = regions_of(p, RegionKind::Spec);
    REQUIRE(specs.size() == 1);
    CHECK(p.text(specs[0]->span) == "spec fn double(x: int) -> int { 2 * x }");
    auto lemmas = regions_of(p, RegionKind::LemmaFn);
    REQUIRE(lemmas.size() == 1);
    CHECK(lemmas[0]->span.first_line == 3);
    CHECK(lemmas[0]->span.last_line == 7);
  }
}

TEST_SUITE("segment_blocks") {
  TEST_CASE("worked example second loop portion") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    auto blocks = segment_blocks(p);

    auto* inv = block_at_line(blocks, 40);
    auto* asr = block_at_line(blocks, 50);
    auto* lem = block_at_line(blocks, 67);
    REQUIRE(inv);
    REQUIRE(asr);
    REQUIRE(lem);
    CHECK(inv->kind == BlockKind::InvariantBlock);
    CHECK(asr->kind == BlockKind::AssertionBlock);
    CHECK(lem->kind == BlockKind::LemmaBlock);
    CHECK(std::set<BlockId>{inv->id, asr->id, lem->id}.size() == 3);

    CHECK(inv->spans.size() == 1);
    CHECK(inv->spans.front().first_line == 38);
    CHECK(inv->spans.back().last_line == 42);
    CHECK(asr->spans.front().first_line == 47);
    CHECK(asr->spans.back().last_line == 61);
    CHECK(lem->spans.front().first_line == 65);
    CHECK(lem->spans.back().last_line == 70);

    // the ExecCode line right before the first post-loop assert closes the loop
    CHECK(block_at_line(blocks, 46) == nullptr);
    CHECK(block_at_line(blocks, 62) == nullptr);
  }

  TEST_CASE("assertions split by an executable line") {
    auto p = annotate_regions("fn f() {\n  assert(a);\n  x = 1;\n  assert(b);\n}\n");
    auto blocks = segment_blocks(p);
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0].kind == BlockKind::AssertionBlock);
    CHECK(blocks[1].kind == BlockKind::AssertionBlock);
  }

  TEST_CASE("adjacent assertions form one block") {
    auto p = annotate_regions("fn f() {\n  assert(a);\n  // note\n  assert(b);\n  proof { assert(c); }\n  x = 1;\n}\n");
    auto blocks = segment_blocks(p);
    REQUIRE(blocks.size() == 1);
    CHECK(blocks[0].spans.size() == 3);
  }

  TEST_CASE("corpus block counts") {
    std::map<std::string, std::size_t> expected{{"abs_val.rs", 1}, {"max_index.rs", 3}, {"sum_to.rs", 2}};
    for (const auto& [name, n] : expected) {
      auto blocks = segment_blocks(annotate_regions(fixture("corpus/" + name)));
      CHECK_MESSAGE(blocks.size() == n, name);
    }
  }

  TEST_CASE("partition and order on fixtures and random programs") {
    std::mt19937_64 rng(7);
    auto programs = fixture_programs();
    for (int i = 0; i < 200; ++i) programs.push_back(testing::random_program(rng));
    for (const auto& src : programs) {
      auto p = annotate_regions(src);
      auto blocks = segment_blocks(p);
      std::size_t hint_regions = 0;
      for (const auto& r : p.regions) {
        if (r.kind == RegionKind::ExecCode || r.kind == RegionKind::Spec) continue;
        ++hint_regions;
        int owners = 0;
        for (const auto& b : blocks)
          owners += static_cast<int>(std::count(b.spans.begin(), b.spans.end(), r.span));
        CHECK(owners == 1);
      }
      std::size_t spans = 0;
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        spans += blocks[k].spans.size();
        CHECK(blocks[k].order_index == k);
        CHECK(blocks[k].id == k);
        if (k > 0) CHECK(blocks[k - 1].spans.front().begin < blocks[k].spans.front().begin);
        if (blocks[k].kind == BlockKind::LemmaBlock) CHECK(blocks[k].spans.size() == 1);
      }
      CHECK(spans == hint_regions);
    }
  }
}

TEST_SUITE("remove and splice") {
  TEST_CASE("removing nothing is the identity") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    auto m = remove_blocks(p, {});
    CHECK(m.source == p.source);
    CHECK(m.holes.empty());
    CHECK(splice_completion(m, std::string_view("")) == p.source);
  }

  TEST_CASE("removing every block keeps code and specs") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    auto blocks = segment_blocks(p);
    std::set<BlockId> all;
    for (const auto& b : blocks) all.insert(b.id);
    auto m = remove_blocks(p, blocks, all);
    CHECK(m.source.find("invariant") == std::string::npos);
    CHECK(m.source.find("assert") == std::string::npos);
    CHECK(m.source.find("proof fn") == std::string::npos);
    for (const auto& r : p.regions)
      if (r.kind == RegionKind::ExecCode || r.kind == RegionKind::Spec)
        CHECK_MESSAGE(m.source.find(p.text(r.span)) != std::string::npos, p.text(r.span));
    // the masked program still scans
    CHECK_NOTHROW(annotate_regions(m.source));
  }

  TEST_CASE("invariant removal takes the keyword with it") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    auto blocks = segment_blocks(p);
    auto* inv = block_at_line(blocks, 40);
    REQUIRE(inv);
    auto m = remove_blocks(p, blocks, {inv->id});
    REQUIRE(m.holes.size() == 1);
    CHECK(m.holes[0].whole_lines);
    CHECK(m.holes[0].original_text.find("        invariant\n") == 0);
    CHECK(m.source.find("    while index < second.len()\n    {\n") != std::string::npos);
    auto q = annotate_regions(m.source);
    CHECK(regions_of(q, RegionKind::Invariant).size() == 1);
  }

  TEST_CASE("unknown block id") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    CHECK_THROWS_AS(remove_blocks(p, {999}), UnknownBlock);
  }

  TEST_CASE("missing hole key") {
    auto p = annotate_regions(fixture("programs/replace_last.rs"));
    auto m = remove_blocks(p, {0, 1});
    REQUIRE(m.holes.size() >= 2);
    std::map<std::string, std::string> fills{{"1", "assert(true);\n"}};
    try {
      splice_completion(m, fills);
      FAIL("expected MissingHoleKey");
    } catch (const MissingHoleKey& e) {
      CHECK(e.key() == "2");
    }
    CHECK_THROWS_AS(splice_completion(m, std::string_view("### HOLE 1\n```\nassert(true);\n```\n")), MissingHoleKey);
  }

  TEST_CASE("arbitrary text is spliced verbatim") {
    auto p = annotate_regions("fn f() {\n  x = 1;\n  assert(x == 1);\n  x\n}\n");
    auto m = remove_blocks(p, {0});
    CHECK(m.source == "fn f() {\n  x = 1;\n  x\n}\n");
    auto c = splice_completion(m, std::string_view("### HOLE 1\n```rust\n  garbage ) here\n```\n"));
    CHECK(c == "fn f() {\n  x = 1;\n  garbage ) here\n  x\n}\n");
  }

  TEST_CASE("markers") {
    auto p = annotate_regions("fn f() {\n  x = 1; assert(x == 1);\n  assert(y);\n  x\n}\n");
    auto blocks = segment_blocks(p);
    REQUIRE(blocks.size() == 1);
    auto m = remove_blocks(p, blocks, {0}, {.markers = true});
    REQUIRE(m.holes.size() == 1);
    CHECK(m.source == "fn f() {\n  x = 1; /* PROOF HOLE 1 */\n  x\n}\n");
    CHECK(splice_completion(m, std::string_view(ground_truth_completion(m))) == p.source);
  }

  TEST_CASE("round trip on fixtures, bare and marked, every single block and all blocks") {
    for (const auto& src : fixture_programs()) {
      auto p = annotate_regions(src);
      auto blocks = segment_blocks(p);
      std::vector<std::set<BlockId>> choices;
      std::set<BlockId> all;
      for (const auto& b : blocks) {
        choices.push_back({b.id});
        all.insert(b.id);
      }
      choices.push_back(all);
      for (bool markers : {false, true})
        for (const auto& ids : choices) {
          auto m = remove_blocks(p, blocks, ids, {.markers = markers});
          auto back = splice_completion(m, std::string_view(ground_truth_completion(m)));
          CHECK(normalize_whitespace(back) == normalize_whitespace(src));
          CHECK(back == src);  // the fixtures survive even without normalization
        }
    }
  }

  TEST_CASE("round trip on random programs and random subsets") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
      auto src = testing::random_program(rng);
      auto p = annotate_regions(src);
      auto blocks = segment_blocks(p);
      std::set<BlockId> ids;
      for (const auto& b : blocks)
        if (rng() % 2) ids.insert(b.id);
      auto m = remove_blocks(p, blocks, ids, {.markers = (rng() % 2) == 1});
      CHECK(m.holes.size() >= ids.size());
      std::set<BlockId> covered;
      for (const auto& h : m.holes) covered.insert(h.block_id);
      CHECK(covered == ids);
      auto gt = ground_truth_by_block(m);
      CHECK(gt.size() == ids.size());
      auto back = splice_completion(m, std::string_view(ground_truth_completion(m)));
      CHECK(normalize_whitespace(back) == normalize_whitespace(src));
    }
  }

  TEST_CASE("completion parsing") {
    auto fills = parse_completion("Here you go.\n\n### HOLE 2\n```rust\nb\n```\n### HOLE 1\n```\na\n```\n### HOLE 1\n```\nz\n```\n");
    CHECK(fills.size() == 2);
    CHECK(fills["1"] == "a\n");
    CHECK(fills["2"] == "b\n");
    std::map<std::string, std::string> many;
    for (int k = 1; k <= 11; ++k) many[std::to_string(k)] = "s" + std::to_string(k) + "\n";
    auto text = format_completion(many);
    CHECK(text.find("HOLE 2") < text.find("HOLE 10"));
    CHECK(parse_completion(text) == many);
  }

  TEST_CASE("whitespace normalization") {
    CHECK(normalize_whitespace("\n\na  \n\n\n b\t\n\n") == "a\n\n b\n");
    CHECK(normalize_whitespace("x\r\ny") == "x\ny\n");
    CHECK(normalize_whitespace("") == "");
  }
}
