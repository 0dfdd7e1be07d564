#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "vcot/agents.hpp"
#include "vcot/backends.hpp"
#include "vcot/error.hpp"
#include "vcot/prompts.hpp"
#include "vcot/util.hpp"

using namespace vcot;
using namespace vcot::agents;
using namespace vcot::z3proof;

namespace {

std::string fixture(const std::string& rel) { return read_file(std::string(VCOT_FIXTURES) + "/" + rel); }

struct TraceFixture {
  std::string text = fixture("traces/replace_last.proof");
  ProofDocument doc = parse_proof(text);
  std::vector<RuleLevel> levels = annotate_levels(doc);
};

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vcot_test_agents_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const std::string kProgram = "fn f() {\n    let x = 1;\n    assert(x == 1);\n}\n";

std::string program_answer(const std::string& body) { return "Sure.\n\n### PROGRAM\n```rust\n" + body + "```\n"; }

}  // namespace

TEST_SUITE("transformer") {
  TEST_CASE("scripted program is returned verbatim") {
    TraceFixture t;
    ScriptedBackend b({{"transformer", {program_answer(kProgram)}}});
    TransformerInput in{kProgram, t.text, &t.doc, &t.levels, std::nullopt, false};
    CHECK(run_transformer(in, b) == kProgram);
    CHECK(b.requests().size() == 1);
  }

  TEST_CASE("prose answer is re-asked once, then rejected") {
    TraceFixture t;
    ScriptedBackend b({{"transformer", {"I think the proof is fine."}}});
    TransformerInput in{kProgram, t.text, &t.doc, &t.levels, std::nullopt, false};
    CHECK_THROWS_AS(run_transformer(in, b), ProtocolError);
    auto reqs = b.requests();
    REQUIRE(reqs.size() == 2);
    CHECK(reqs[1].user_prompt.find("could not be used") != std::string::npos);
    CHECK(reqs[0].user_prompt.find("could not be used") == std::string::npos);
  }

  TEST_CASE("re-ask can recover") {
    TraceFixture t;
    ScriptedBackend b({{"transformer", {"no sections here", program_answer(kProgram)}}});
    TransformerInput in{kProgram, t.text, &t.doc, &t.levels, std::nullopt, false};
    CHECK(run_transformer(in, b) == kProgram);
  }

  TEST_CASE("prompt carries tagged trace and the whole glossary") {
    TraceFixture t;
    TransformerInput in{kProgram, t.text, &t.doc, &t.levels, std::nullopt, false};
    auto req = transformer_request(in);
    for (const auto& r : rule_table()) {
      CHECK_MESSAGE(req.user_prompt.find(std::string(r.description)) != std::string::npos, r.name);
    }
    // every rule line of the trace shows up with its level tag
    auto tagged = tag_trace_lines(t.text, t.doc, t.levels);
    auto lines = split_lines(tagged);
    for (const auto& n : t.doc.nodes()) {
      auto line = lines.at(n.source_line - 1);
      CHECK(line.substr(0, 1) == "[");
      CHECK(line.find(n.rule) != std::string_view::npos);
    }
    auto lemma_line = lines.at(t.doc.node(6).source_line - 1);
    CHECK(lemma_line.substr(0, 4) == "[H] ");
    CHECK(req.user_prompt.find(tagged) != std::string::npos);
  }

  TEST_CASE("highest level wins on a shared line") {
    auto doc = parse_proof("(mp (asserted p) (refl q) r)");
    auto levels = annotate_levels(doc);
    CHECK(tag_trace_lines("(mp (asserted p) (refl q) r)", doc, levels).substr(0, 4) == "[H] ");
  }
}

TEST_SUITE("checker") {
  CheckerInput lemma_input(TraceFixture& t, AggregatedSegments& seg, std::string_view candidate) {
    seg = aggregate_segments(t.doc, RuleCategory::Lemma);
    return {RuleCategory::Lemma, &seg, &t.doc, &t.levels, candidate};
  }

  TEST_CASE("trivial filter counts toward completeness") {
    TraceFixture t;
    AggregatedSegments seg;
    auto in = lemma_input(t, seg, kProgram);
    REQUIRE(seg.anchors == std::vector<NodeId>{6, 9});
    ScriptedBackend b({{"checker:lemma",
                        {"### MAPPING\n```\nn6 | TRIVIAL | index < index + 1 holds for any integer\nn9 | MAPPED | "
                         "assert(x == 1);\n```\n"}}});
    auto v = run_checker(in, b);
    CHECK(v.status() == VerdictStatus::Complete);
    REQUIRE(v.mapping().size() == 2);
    CHECK(v.mapping()[0].disposition == Disposition::FilteredTrivial);
    CHECK(v.mapping()[1].text == "assert(x == 1);");
  }

  TEST_CASE("one missing anchor makes the verdict incomplete") {
    TraceFixture t;
    AggregatedSegments seg;
    auto in = lemma_input(t, seg, kProgram);
    ScriptedBackend b({{"checker",
                        {"### MAPPING\nn6 | MISSING\nn9 | REDUNDANT:REASSERTION | restates the loop invariant\n"}}});
    auto v = run_checker(in, b);
    CHECK(v.status() == VerdictStatus::Incomplete);
    CHECK(v.mapping()[1].redundancy == RedundancyKind::Reassertion);
  }

  TEST_CASE("zero anchors are vacuously complete") {
    auto doc = parse_proof("(mp (asserted p) (refl q) r)");
    auto levels = annotate_levels(doc);
    auto seg = aggregate_segments(doc, RuleCategory::TheoryLemma);
    REQUIRE(seg.anchors.empty());
    ScriptedBackend b;
    auto v = run_checker({RuleCategory::TheoryLemma, &seg, &doc, &levels, kProgram}, b);
    CHECK(v.complete());
    CHECK(v.mapping().empty());
    CHECK(b.requests().empty());
  }

  TEST_CASE("mapping protocol violations") {
    std::vector<NodeId> anchors{3, 5};
    CHECK_THROWS_AS(parse_mapping("n3 | MAPPED | x", anchors), ProtocolError);  // no section
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | MAPPED | x\n", anchors), ProtocolError);  // n5 absent
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | MAPPED |\nn5 | MISSING\n", anchors), ProtocolError);
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | TRIVIAL\nn5 | MISSING\n", anchors), ProtocolError);
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | REDUNDANT | why\nn5 | MISSING\n", anchors), ProtocolError);
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | REDUNDANT:OTHER | why\nn5 | MISSING\n", anchors), ProtocolError);
    CHECK_THROWS_AS(parse_mapping("### MAPPING\nn3 | MAYBE | why\nn5 | MISSING\n", anchors), ProtocolError);
    // extra rows for non-anchors are ignored; order follows the anchors
    auto m = parse_mapping("### MAPPING\n- `n5 | MISSING`\n- n1 | MISSING\n- n3 | redundant:definition_expansion | unfolds f\n",
                           anchors);
    REQUIRE(m.size() == 2);
    CHECK(m[0].z3_node == 3);
    CHECK(m[0].redundancy == RedundancyKind::DefinitionExpansion);
    CHECK(m[1].disposition == Disposition::Missing);
  }

  TEST_CASE("prompt has category guidance, filter definitions and present rules") {
    TraceFixture t;
    for (auto c : kAllCategories) {
      auto seg = aggregate_segments(t.doc, c);
      CheckerInput in{c, &seg, &t.doc, &t.levels, kProgram};
      auto req = checker_request(in);
      CHECK(req.tag == std::string(to_string(c)));
      CHECK(req.system_prompt.find("NORMALIZATION") != std::string::npos);
      CHECK(req.system_prompt.find("REASSERTION") != std::string::npos);
      CHECK(req.system_prompt.find("DEFINITION-EXPANSION") != std::string::npos);
      CHECK(req.system_prompt.find("TRIVIAL") != std::string::npos);
      for (const auto& name : rules_present(t.doc, &seg.members))
        CHECK_MESSAGE(req.user_prompt.find(std::string(find_rule(name)->description)) != std::string::npos, name);
      for (auto a : seg.anchors) CHECK(req.user_prompt.find("* n" + std::to_string(a) + " [H]") != std::string::npos);
    }
    auto seg = aggregate_segments(t.doc, RuleCategory::Lemma);
    auto req = checker_request({RuleCategory::Lemma, &seg, &t.doc, &t.levels, kProgram});
    CHECK(req.system_prompt.find("proof fn") != std::string::npos);
  }

  TEST_CASE("verdict law on random mapping tables") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
      std::vector<MappingEntry> m;
      std::size_t n = rng() % 8;
      bool any_missing = false;
      for (std::size_t k = 0; k < n; ++k) {
        auto d = static_cast<Disposition>(rng() % 4);
        any_missing |= d == Disposition::Missing;
        m.push_back({static_cast<NodeId>(k), d, std::nullopt, "t"});
      }
      CheckerVerdict v(RuleCategory::Quantifier, m);
      CHECK((v.status() == VerdictStatus::Complete) == !any_missing);
    }
  }
}

TEST_SUITE("pruner") {
  const std::string kCandidate =
      "fn g(v: &Vec<u8>) {\n    let mut index = 0;\n    while index < v.len()\n        invariant\n            0 <= index <= "
      "v.len(),\n    {\n        index += 1;\n    }\n    assert(0 <= index <= v@.len());\n    assert(index == v.len());\n}\n";

  TEST_CASE("redundant reassertion is removed") {
    ScriptedBackend b({{"pruner", {"### DECISIONS\n```\nL9 | REDUNDANT:REASSERTION | already established by the loop invariant\n```\n"}}});
    auto r = run_pruner(kCandidate, b);
    CHECK(r.pruned.find("assert(0 <= index") == std::string::npos);
    CHECK(r.pruned.find("assert(index == v.len());") != std::string::npos);
    REQUIRE(r.decision.removals.size() == 1);
    CHECK(r.decision.removals[0].cls == RemovalClass::Redundant);
    CHECK(r.decision.removals[0].redundancy == RedundancyKind::Reassertion);
    CHECK(restore_pruned(r.pruned, r.decision, kCandidate) == kCandidate);
    CHECK(b.requests()[0].user_prompt.find("L9:     assert(0 <= index") != std::string::npos);
  }

  TEST_CASE("empty decision is the identity") {
    ScriptedBackend b({{"pruner", {"### DECISIONS\n```\nNONE\n```\n"}}});
    auto r = run_pruner(kCandidate, b);
    CHECK(r.pruned == kCandidate);
    CHECK(r.decision.removals.empty());
  }

  TEST_CASE("missing justification is retried then rejected") {
    ScriptedBackend b({{"pruner", {"### DECISIONS\n```\nL9 | TRIVIAL |\n```\n"}}});
    CHECK_THROWS_AS(run_pruner(kCandidate, b), ProtocolError);
    CHECK(b.requests().size() == 2);
  }

  TEST_CASE("bad ranges and overlaps") {
    CHECK_THROWS_AS(apply_decisions(kCandidate, "### DECISIONS\nL0 | TRIVIAL | x\n"), ProtocolError);
    CHECK_THROWS_AS(apply_decisions(kCandidate, "### DECISIONS\nL12 | TRIVIAL | x\n"), ProtocolError);
    CHECK_THROWS_AS(apply_decisions(kCandidate, "### DECISIONS\nL5-L3 | TRIVIAL | x\n"), ProtocolError);
    CHECK_THROWS_AS(apply_decisions(kCandidate, "### DECISIONS\nL3-L5 | TRIVIAL | x\nL5 | TRIVIAL | y\n"), ProtocolError);
    CHECK_THROWS_AS(apply_decisions(kCandidate, "### DECISIONS\nL3 | USELESS | x\n"), ProtocolError);
    CHECK_NOTHROW(apply_decisions(kCandidate, "### DECISIONS\nL11 | TRIVIAL | x\n"));
  }

  TEST_CASE("conservation on random decisions") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
      std::string cand;
      std::size_t n = 1 + rng() % 15;
      for (std::size_t k = 0; k < n; ++k) cand += "line " + std::to_string(k) + std::string(rng() % 3, ' ') + "\n";
      if (rng() % 2) cand.pop_back();  // sometimes no final newline
      std::string dec = "### DECISIONS\n";
      std::size_t l = 1;
      while (l <= n) {
        std::size_t len = 1 + rng() % 3;
        std::size_t last = std::min(n, l + len - 1);
        if (rng() % 2) dec += "L" + std::to_string(l) + "-L" + std::to_string(last) + " | TRIVIAL | because\n";
        l = last + 1 + rng() % 2;
      }
      auto r = apply_decisions(cand, dec);
      CHECK(restore_pruned(r.pruned, r.decision, cand) == cand);
      std::size_t removed = 0;
      for (const auto& rem : r.decision.removals) removed += rem.end - rem.begin;
      CHECK(r.pruned.size() + removed == cand.size());
    }
  }
}

TEST_SUITE("repair") {
  VerusDiagnostics diag() {
    VerusDiagnostics d;
    d.mode = VerusMode::Verify;
    d.errors.push_back({12, "expected one of `)`, `,`", std::nullopt, false});
    d.raw_output = "error: expected one of `)`, `,`\n --> candidate.rs:12:30\n";
    return d;
  }

  TEST_CASE("unchanged answer is passed through") {
    ScriptedBackend b({{"repair", {program_answer(kProgram)}}});
    CHECK(run_repair(kProgram, diag(), b) == kProgram);
    auto req = b.requests().at(0);
    CHECK(req.system_prompt.find("never chain casts") != std::string::npos);
    CHECK(req.user_prompt.find("line 12: expected one of") != std::string::npos);
  }

  TEST_CASE("no program section") {
    ScriptedBackend b({{"repair", {"Looks fine to me."}}});
    CHECK_THROWS_AS(run_repair(kProgram, diag(), b), ProtocolError);
  }

  TEST_CASE("needs diagnostics") {
    ScriptedBackend b({{"repair", {program_answer(kProgram)}}});
    CHECK_THROWS_AS(run_repair(kProgram, VerusDiagnostics{}, b), std::invalid_argument);
  }
}

TEST_SUITE("judge") {
  const std::vector<std::string> kTruth{"    assert(x == 1);\n"};

  TEST_CASE("identity is correct without a model call") {
    ScriptedBackend b;
    CHECK(run_judge(kTruth, "    assert(x == 1);\n", kProgram, b).semantically_correct);
    CHECK(run_judge(kTruth, "### HOLE 1\n```rust\n    assert(x == 1);  \n```\n", kProgram, b).semantically_correct);
    CHECK(b.requests().empty());
  }

  TEST_CASE("empty completion is incorrect without a model call") {
    ScriptedBackend b;
    auto v = run_judge(kTruth, "", kProgram, b);
    CHECK_FALSE(v.semantically_correct);
    CHECK_FALSE(v.rationale.empty());
    CHECK_FALSE(run_judge(kTruth, "### HOLE 1\n```\n```\n", kProgram, b).semantically_correct);
    CHECK(b.requests().empty());
  }

  TEST_CASE("model verdicts") {
    ScriptedBackend b({{"judge",
                        {"### VERDICT\nCORRECT\n\n### RATIONALE\nSame fact, spelled differently.\n",
                         "VERDICT: INCORRECT\nRATIONALE: weaker than needed\n"}}});
    auto v1 = run_judge(kTruth, "### HOLE 1\n```\nassert(1 == x);\n```\n", kProgram, b);
    CHECK(v1.semantically_correct);
    CHECK(v1.rationale == "Same fact, spelled differently.");
    auto v2 = run_judge(kTruth, "### HOLE 1\n```\nassert(x >= 0);\n```\n", kProgram, b);
    CHECK_FALSE(v2.semantically_correct);
    auto req = b.requests().at(0);
    CHECK(req.user_prompt.find(kProgram) != std::string::npos);  // full program context
    CHECK(req.system_prompt.find("Example 1") != std::string::npos);
  }

  TEST_CASE("rationale is required") {
    ScriptedBackend b({{"judge", {"### VERDICT\nCORRECT\n"}}});
    CHECK_THROWS_AS(run_judge(kTruth, "assert(true);", kProgram, b), ProtocolError);
  }
}

TEST_SUITE("backends") {
  TEST_CASE("prompt normalization and keys") {
    AgentRequest a{AgentKind::Pruner, "", "sys", "line one  \r\nline two\n\n\n"};
    AgentRequest b{AgentKind::Pruner, "", "sys", "line one\nline two\n"};
    AgentRequest c{AgentKind::Repair, "", "sys", "line one\nline two\n"};
    AgentRequest d{AgentKind::Pruner, "", "sys", "line one\nline 2\n"};
    CHECK(request_key(a) == request_key(b));
    CHECK(request_key(a) != request_key(c));
    CHECK(request_key(a) != request_key(d));
    CHECK(request_key(a).size() == 64);
  }

  TEST_CASE("record then replay is deterministic") {
    auto dir = scratch_dir("cassette");
    auto cassette = dir / "run.jsonl";
    ScriptedBackend inner({{"pruner", {"### DECISIONS\nNONE\n"}}, {"judge", {"### VERDICT\nCORRECT\n### RATIONALE\nok\n"}}});
    {
      RecordingBackend rec(inner, cassette);
      run_pruner("x\n", rec);
      run_pruner("x\n", rec);  // same key recorded once
      run_judge({"a\n"}, "b\n", "ctx", rec);
    }
    auto records = load_cassette(cassette);
    CHECK(records.size() == 2);
    CHECK(records[0].request_digest.rfind("pruner ", 0) == 0);

    ReplayBackend replay(dir);
    CHECK(replay.size() == 2);
    auto r1 = run_pruner("x\n", replay);
    auto r2 = run_pruner("x\n", replay);
    CHECK(r1.pruned == r2.pruned);
    CHECK(run_judge({"a\n"}, "b\n", "ctx", replay).semantically_correct);
    CHECK_THROWS_AS(run_pruner("y\n", replay), BackendError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("replay tolerates concurrent callers") {
    auto dir = scratch_dir("concurrent");
    ScriptedBackend inner({{"repair", {program_answer(kProgram)}}});
    VerusDiagnostics d;
    d.raw_output = "error";
    {
      RecordingBackend rec(inner, dir / "c.jsonl");
      run_repair(kProgram, d, rec);
    }
    ReplayBackend replay(dir / "c.jsonl");
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
      threads.emplace_back([&] {
        for (int k = 0; k < 50; ++k)
          if (run_repair(kProgram, d, replay) == kProgram) ++ok;
      });
    for (auto& th : threads) th.join();
    CHECK(ok == 400);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("scripted backend from json") {
    auto dir = scratch_dir("script");
    write_new_file(dir / "s.json", R"({"checker:lemma": ["a", "b"], "checker": "c"})");
    auto b = ScriptedBackend::from_json_file(dir / "s.json");
    AgentRequest lemma{AgentKind::Checker, "lemma", "", ""};
    AgentRequest quant{AgentKind::Checker, "quantifier", "", ""};
    CHECK(b->complete(lemma).text == "a");
    CHECK(b->complete(lemma).text == "b");
    CHECK(b->complete(lemma).text == "b");
    CHECK(b->complete(quant).text == "c");
    CHECK(b->calls("checker:lemma") == 3);
    AgentRequest judge{AgentKind::Judge, "", "", ""};
    CHECK_THROWS_AS(b->complete(judge), BackendError);
    std::filesystem::remove_all(dir);
  }
}

TEST_SUITE("live backend") {
  struct Server {
    httplib::Server srv;
    int port = 0;
    std::thread th;
    std::atomic<int> hits{0};
    std::string last_auth;
    nlohmann::json last_body;
    int fail_first = 0;

    Server() {
      srv.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
        int n = ++hits;
        last_auth = req.get_header_value("Authorization");
        last_body = nlohmann::json::parse(req.body);
        if (n <= fail_first) {
          res.status = 503;
          return;
        }
        nlohmann::json out{{"choices", {{{"message", {{"role", "assistant"}, {"content", "### PROGRAM\n```\nfn z() {}\n```\n"}}}}}}};
        res.set_content(out.dump(), "application/json");
      });
      port = srv.bind_to_any_port("127.0.0.1");
      th = std::thread([this] { srv.listen_after_bind(); });
      srv.wait_until_ready();
    }
    ~Server() {
      srv.stop();
      th.join();
    }
  };

  TEST_CASE("chat completion round trip with bearer key") {
    Server s;
    ::setenv("VCOT_TEST_KEY", "sk-secret-123", 1);
    LiveBackend live({"http://127.0.0.1:" + std::to_string(s.port) + "/v1/", "test-model", "VCOT_TEST_KEY", 0.0, 10, 3, 0});
    AgentRequest req{AgentKind::Repair, "", "system text", "user text"};
    auto res = live.complete(req);
    CHECK(res.text == "### PROGRAM\n```\nfn z() {}\n```\n");
    CHECK(s.last_auth == "Bearer sk-secret-123");
    CHECK(s.last_body["model"] == "test-model");
    CHECK(s.last_body["messages"][0]["content"] == "system text");
    CHECK(s.last_body["messages"][1]["role"] == "user");
    CHECK(s.last_body["messages"][1]["content"] == "user text");
  }

  TEST_CASE("server errors are retried, and the key never leaks into errors") {
    Server s;
    s.fail_first = 1;
    ::setenv("VCOT_TEST_KEY", "sk-secret-123", 1);
    LiveBackend live({"http://127.0.0.1:" + std::to_string(s.port) + "/v1", "m", "VCOT_TEST_KEY", 0.0, 10, 2, 0});
    AgentRequest req{AgentKind::Judge, "", "s", "u"};
    CHECK_NOTHROW(live.complete(req));
    CHECK(s.hits == 2);

    s.fail_first = 100;
    try {
      live.complete(req);
      FAIL("expected BackendError");
    } catch (const BackendError& e) {
      CHECK(std::string(e.what()).find("503") != std::string::npos);
      CHECK(std::string(e.what()).find("sk-secret") == std::string::npos);
    }
  }

  TEST_CASE("configuration errors") {
    ::unsetenv("VCOT_UNSET_KEY_VAR");
    CHECK_THROWS_AS(LiveBackend({"http://x/v1", "m", "VCOT_UNSET_KEY_VAR"}), ConfigError);
    CHECK_THROWS_AS(LiveBackend({"no-scheme/v1", "m", ""}), ConfigError);
    CHECK_THROWS_AS(LiveBackend({"http://x/v1", "", ""}), ConfigError);
  }

  TEST_CASE("unreachable server is a backend error") {
    LiveBackend live({"http://127.0.0.1:1/v1", "m", "", 0.0, 2, 1, 0});
    CHECK_THROWS_AS(live.complete({AgentKind::Judge, "", "s", "u"}), BackendError);
  }
}
