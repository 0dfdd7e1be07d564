// vcot command-line frontend.
//
// Exit codes: 0 success, 1 domain failure (unverified, incomplete, bad
// input), 2 configuration or environment failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcot/backends.hpp"
#include "vcot/benchgen.hpp"
#include "vcot/config.hpp"
#include "vcot/error.hpp"
#include "vcot/eval.hpp"
#include "vcot/pipeline.hpp"
#include "vcot/util.hpp"
#include "vcot/verus_model.hpp"
#include "vcot/z3proof.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vcot;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kEnvironment = 2;

// An unreadable input is an environment problem, not a bad trace.
std::string read_input(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw ConfigError("cannot read " + p.string());
  return read_file(p);
}

config::ToolConfig load(const std::string& path) {
  return path.empty() ? config::default_config() : config::load_config(path);
}

std::unique_ptr<agents::AgentBackend> backend_for(const config::ToolConfig& cfg) {
  if (!cfg.backend) throw ConfigError("no backend configured (set backend.mode in the config file)");
  return config::make_backend(*cfg.backend);
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
  std::string trace;
  bool lenient = false;
  bool as_json = false;
};

int cmd_stats(const StatsArgs& a) {
  auto text = read_input(a.trace);
  auto doc = z3proof::parse_proof(text);
  auto st = z3proof::proof_stats(doc, text, a.lenient);
  if (a.as_json) {
    json levels = json::object();
    for (auto l : z3proof::kAllLevels)
      levels[std::string(z3proof::to_string(l))] = {{"count", st.level(l).count}, {"share", st.level(l).share}};
    std::cout << json{{"nodes", st.node_count}, {"trace_lines", st.trace_line_count}, {"levels", levels}, {"rules", st.per_rule}}.dump(2)
              << "\n";
    return kOk;
  }
  std::cout << "nodes: " << st.node_count << "\ntrace lines: " << st.trace_line_count << "\n";
  for (auto l : z3proof::kAllLevels)
    std::cout << z3proof::to_string(l) << ": " << st.level(l).count << " (" << format_percent(100.0 * st.level(l).share) << "%)\n";
  return kOk;
}

// ---- segment --------------------------------------------------------------

int cmd_segment(const std::string& path, bool as_json) {
  auto program = verus::annotate_regions(read_input(path));
  auto blocks = verus::segment_blocks(program);
  if (as_json) {
    json out = json::array();
    for (const auto& b : blocks) {
      json spans = json::array();
      for (const auto& s : b.spans) spans.push_back({{"lines", {s.first_line, s.last_line}}, {"bytes", {s.begin, s.end}}});
      out.push_back({{"id", b.id}, {"kind", verus::to_string(b.kind)}, {"spans", spans}});
    }
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  std::cout << blocks.size() << " blocks\n";
  for (const auto& b : blocks) {
    std::cout << "  " << b.id << " " << verus::to_string(b.kind) << " lines";
    for (const auto& s : b.spans) std::cout << " " << s.first_line << "-" << s.last_line;
    std::cout << "\n";
  }
  return kOk;
}

// ---- lift -----------------------------------------------------------------

struct LiftArgs {
  std::string program;
  std::string trace;
  std::string config;
  std::string out;
  std::string record;
};

int cmd_lift(const LiftArgs& a) {
  auto cfg = load(a.config);
  auto program = verus::annotate_regions(read_input(a.program));
  auto trace = read_input(a.trace);
  auto proof = z3proof::parse_proof(trace);
  auto backend = backend_for(cfg);
  std::optional<agents::RecordingBackend> recorder;
  if (!a.record.empty()) recorder.emplace(*backend, a.record);
  agents::AgentBackend& agent = recorder ? static_cast<agents::AgentBackend&>(*recorder) : *backend;

  fs::path run_dir = a.out.empty() ? cfg.output_root / ("lift-" + fs::path(a.program).stem().string()) : fs::path(a.out);
  auto settings = cfg.verus;
  pipeline::SubprocessVerus verus(settings);
  auto outcome = pipeline::lift(program, proof, trace, cfg.lift, agent, verus, run_dir);
  if (!outcome.final_program.empty()) write_new_file(run_dir / "final.rs", outcome.final_program);

  std::cout << "status: " << pipeline::to_string(outcome.status) << "\n"
            << "transform loops: " << outcome.transform_loops_used << "\n"
            << "repair iterations: " << outcome.repair_iters_used << "\n"
            << "agent calls: " << outcome.agent_calls << "\n"
            << "run directory: " << run_dir.string() << "\n";
  for (const auto& n : outcome.notes) std::cout << "note: " << n << "\n";
  switch (outcome.status) {
    case pipeline::LiftStatus::Lifted: return kOk;
    case pipeline::LiftStatus::VerusUnavailable: return kEnvironment;
    default: return kDomain;
  }
}

// ---- benchgen -------------------------------------------------------------

struct BenchArgs {
  std::string corpus;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool markers = false;
  unsigned jobs = 1;
};

int cmd_benchgen(const BenchArgs& a) {
  auto cfg = load(a.config);
  auto corpus = benchgen::load_corpus(a.corpus);
  auto suite = benchgen::build_suite(corpus, a.seed.value_or(cfg.suite_seed), {a.markers || cfg.markers}, a.jobs);
  fs::path out = a.out.empty() ? cfg.output_root / "suite" : fs::path(a.out);
  benchgen::write_suite(suite, out);

  const auto& c = suite.composition;
  auto dim = [&](benchgen::Dimension d) {
    auto it = c.per_dimension.find(d);
    return it == c.per_dimension.end() ? std::size_t{0} : it->second;
  };
  std::cout << "programs: " << c.programs << "\n";
  for (const auto& s : c.skipped) std::cout << "skipped (no proof blocks): " << s << "\n";
  std::cout << "ratio: " << dim(benchgen::Dimension::Ratio) << "\n"
            << "type: " << dim(benchgen::Dimension::Type) << "\n"
            << "loc: " << dim(benchgen::Dimension::Loc) << "\n"
            << "total: " << c.total << "\n"
            << "suite: " << out.string() << "\n";
  return kOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string suite;
  std::string completions;
  std::string labels;
  std::string config;
  std::string out;
  std::string record;
  unsigned jobs = 1;
  bool per_block = false;
};

void print_report(const eval::AccuracyReport& r) {
  std::cout << "N: " << r.n << " (L0 " << r.levels[0] << ", L1 " << r.levels[1] << ", L2 " << r.levels[2] << ", L3 "
            << r.levels[3] << ")\n"
            << "SynAcc: " << format_percent(r.syn_acc) << "%\n"
            << "SemAcc: " << format_percent(r.sem_acc) << "%\n"
            << "Acc: " << format_percent(r.acc) << "%\n";
}

int cmd_eval(const EvalArgs& a) {
  if (a.completions.empty() && a.labels.empty()) throw ConfigError("eval needs --completions, --labels, or both");
  auto cfg = load(a.config);
  auto suite = benchgen::read_suite(a.suite);
  auto backend = backend_for(cfg);
  std::optional<agents::RecordingBackend> recorder;
  if (!a.record.empty()) recorder.emplace(*backend, a.record);
  agents::AgentBackend* judge = recorder ? static_cast<agents::AgentBackend*>(&*recorder) : backend.get();
  fs::path out = a.out.empty() ? cfg.output_root / "eval" : fs::path(a.out);

  // Resolve the verifier before any output exists: no Verus, no scores.
  std::optional<pipeline::SubprocessVerus> verus;
  std::vector<eval::CompletionRecord> inputs;
  if (!a.completions.empty()) {
    inputs = eval::read_completions(a.completions);
    verus.emplace(cfg.verus);
  }
  prepare_output_dir(out);

  if (!a.completions.empty()) {
    auto records = eval::evaluate(suite, std::move(inputs), *verus, *judge, {a.jobs, a.per_block});
    write_new_file(out / "records.jsonl", eval::records_jsonl(records));
    if (!records.empty()) {
      auto rows = eval::breakdown(records, suite);
      write_new_file(out / "report.csv", eval::breakdown_csv(rows));
      auto overall = eval::accuracy(records);
      std::size_t timeouts = 0, missing = 0;
      for (const auto& r : records) {
        timeouts += r.syntax_timed_out;
        missing += r.missing_hole;
      }
      write_new_file(out / "summary.json",
                     json{{"overall", eval::report_json(overall)}, {"syntax_timeouts", timeouts}, {"missing_holes", missing}}.dump(2) +
                         "\n");
      print_report(overall);
      if (timeouts) std::cout << "syntax checks timed out: " << timeouts << "\n";
    } else {
      std::cout << "no completion records\n";
    }
  }

  if (!a.labels.empty()) {
    auto res = eval::meta_evaluate(suite, eval::read_labels(a.labels), *judge);
    json items = json::array();
    for (const auto& it : res.items)
      items.push_back({{"task_id", it.item.task_id}, {"label", it.item.label}, {"judge", it.judge_verdict}, {"rationale", it.rationale}});
    write_new_file(out / "meta_eval.json", json{{"sample_size", res.items.size()},
                                                {"agreements", res.agreements},
                                                {"agreement", format_percent(100.0 * res.agreement())},
                                                {"items", items}}
                                                   .dump(2) +
                                               "\n");
    std::cout << "judge agreement: " << res.agreements << "/" << res.items.size() << " ("
              << format_percent(100.0 * res.agreement()) << "%)\n";
  }
  std::cout << "output: " << out.string() << "\n";
  return kOk;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::string suite;
  std::string records;
  std::string out;
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
};

int cmd_report(const ReportArgs& a) {
  auto suite = benchgen::read_suite(a.suite);
  if (a.sample) {
    for (const auto& id : eval::stratified_sample(suite, *a.sample, a.seed)) std::cout << id << "\n";
    return kOk;
  }
  if (a.records.empty()) throw ConfigError("report needs --records or --sample");
  auto records = eval::read_records(a.records);
  auto csv = eval::breakdown_csv(eval::breakdown(records, suite));
  if (a.out.empty())
    std::cout << csv;
  else
    write_new_file(a.out, csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VCoT lifting, benchmark generation and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "vcot 0.1.0");

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Rule-level composition of a Z3 proof trace");
  s->add_option("trace", stats.trace, "Z3 proof trace")->required();
  s->add_flag("--lenient", stats.lenient, "Count unknown rules as Low instead of failing");
  s->add_flag("--json", stats.as_json, "Print JSON");

  std::string seg_path;
  bool seg_json = false;
  auto* g = app.add_subcommand("segment", "List the semantic proof blocks of a Verus program");
  g->add_option("program", seg_path, "Verus source file")->required();
  g->add_flag("--json", seg_json, "Print JSON");

  LiftArgs lift;
  auto* l = app.add_subcommand("lift", "Lift a Z3 proof into a verified Verus VCoT program");
  l->add_option("program", lift.program, "Verus source file")->required();
  l->add_option("trace", lift.trace, "Z3 proof trace")->required();
  l->add_option("--config", lift.config, "Config file");
  l->add_option("--out", lift.out, "Run directory (must be absent or empty)");
  l->add_option("--record-cassette", lift.record, "Append every agent exchange to this cassette");

  BenchArgs bench;
  auto* b = app.add_subcommand("benchgen", "Generate completion tasks from a corpus of VCoT programs");
  b->add_option("corpus", bench.corpus, "Directory of .rs programs")->required();
  b->add_option("--config", bench.config, "Config file");
  b->add_option("--out", bench.out, "Suite directory (must be absent or empty)");
  b->add_option("--seed", bench.seed, "Suite seed (default: config suite.seed)");
  b->add_flag("--markers", bench.markers, "Leave PROOF HOLE markers in masked programs");
  b->add_option("--jobs", bench.jobs, "Programs generated in parallel")->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score completions against a suite");
  e->add_option("--suite", ev.suite, "Suite directory")->required();
  e->add_option("--completions", ev.completions, "Line-delimited completion records");
  e->add_option("--labels", ev.labels, "Human-labeled sample for judge meta-evaluation");
  e->add_option("--config", ev.config, "Config file");
  e->add_option("--out", ev.out, "Output directory (must be absent or empty)");
  e->add_option("--jobs", ev.jobs, "Records scored in parallel")->check(CLI::PositiveNumber);
  e->add_flag("--per-block", ev.per_block, "Also judge each removed block separately (diagnostic)");
  e->add_option("--record-cassette", ev.record, "Append every judge exchange to this cassette");

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "Breakdown tables from rated records, or a stratified sample");
  r->add_option("--suite", rep.suite, "Suite directory")->required();
  r->add_option("--records", rep.records, "Rated records (records.jsonl from eval)");
  r->add_option("--out", rep.out, "Write the CSV here instead of stdout");
  r->add_option("--sample", rep.sample, "Print a stratified sample of this many task ids");
  r->add_option("--seed", rep.seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : kEnvironment;
  }

  try {
    if (*s) return cmd_stats(stats);
    if (*g) return cmd_segment(seg_path, seg_json);
    if (*l) return cmd_lift(lift);
    if (*b) return cmd_benchgen(bench);
    if (*e) return cmd_eval(ev);
    if (*r) return cmd_report(rep);
  } catch (const ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kEnvironment;
  } catch (const VerusUnavailable& err) {
    std::cerr << "verus unavailable: " << err.what() << "\n";
    return kEnvironment;
  } catch (const BackendError& err) {
    std::cerr << "backend error: " << err.what() << "\n";
    return kEnvironment;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kDomain;
  }
  return kDomain;
}
