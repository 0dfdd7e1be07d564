#include "vcot/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <set>

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::pipeline {

using nlohmann::json;
using namespace z3proof;
namespace fs = std::filesystem;

void LiftConfig::validate() const {
  if (max_transform_loops < 1) throw ConfigError("max_transform_loops must be at least 1");
  if (max_repair_iters < 1) throw ConfigError("max_repair_iters must be at least 1");
  if (verus_timeout_seconds <= 0) throw ConfigError("verus timeout must be positive");
  std::set<RuleCategory> seen;
  for (auto c : checker_categories)
    if (!seen.insert(c).second) throw ConfigError("checker category listed twice: " + std::string(z3proof::to_string(c)));
}

std::string_view to_string(LiftStatus s) {
  switch (s) {
    case LiftStatus::Lifted: return "lifted";
    case LiftStatus::IncompleteAfterCap: return "incomplete-after-cap";
    case LiftStatus::RepairFailedAfterCap: return "repair-failed-after-cap";
    case LiftStatus::VerusUnavailable: return "verus-unavailable";
  }
  return "?";
}

json to_json(const VerusDiagnostics& d) {
  json errors = json::array();
  for (const auto& e : d.errors) {
    json je{{"line", e.line}, {"message", e.message}};
    if (e.code) je["code"] = *e.code;
    if (e.timeout) je["timeout"] = true;
    errors.push_back(std::move(je));
  }
  return {{"verified", d.verified},
          {"mode", d.mode == VerusMode::Verify ? "verify" : "syntax-only"},
          {"errors", std::move(errors)},
          {"raw_output", d.raw_output}};
}

json to_json(const agents::CheckerVerdict& v) {
  json mapping = json::array();
  for (const auto& e : v.mapping()) {
    json je{{"node", e.z3_node}, {"disposition", agents::to_string(e.disposition)}, {"text", e.text}};
    if (e.redundancy) je["redundancy"] = agents::to_string(*e.redundancy);
    mapping.push_back(std::move(je));
  }
  return {{"category", z3proof::to_string(v.category())}, {"status", agents::to_string(v.status())}, {"mapping", std::move(mapping)}};
}

json to_json(const agents::PrunerDecision& d) {
  json removals = json::array();
  for (const auto& r : d.removals) {
    json jr{{"first_line", r.first_line},
            {"last_line", r.last_line},
            {"class", agents::to_string(r.cls)},
            {"justification", r.justification}};
    if (r.redundancy) jr["redundancy"] = agents::to_string(*r.redundancy);
    removals.push_back(std::move(jr));
  }
  return {{"removals", std::move(removals)}};
}

json outcome_json(const LiftOutcome& o) {
  json loops = json::array();
  for (const auto& l : o.loops) {
    json statuses = json::object();
    for (const auto& v : l.verdicts) statuses[std::string(z3proof::to_string(v.category()))] = agents::to_string(v.status());
    loops.push_back({{"loop", l.loop}, {"complete", l.complete}, {"verdicts", statuses}, {"notes", l.notes}});
  }
  json repairs = json::array();
  for (const auto& r : o.repairs)
    repairs.push_back({{"iter", r.iter}, {"verified", r.diagnostics.verified}, {"errors", r.diagnostics.errors.size()}, {"notes", r.notes}});
  json j{{"status", to_string(o.status)},
         {"transform_loops_used", o.transform_loops_used},
         {"repair_iters_used", o.repair_iters_used},
         {"agent_calls", o.agent_calls},
         {"loops", std::move(loops)},
         {"pruned", o.prune.has_value()},
         {"repairs", std::move(repairs)},
         {"notes", o.notes}};
  if (o.pruned_diagnostics) j["pruned_verified"] = o.pruned_diagnostics->verified;
  if (o.final_diagnostics) j["final_diagnostics"] = to_json(*o.final_diagnostics);
  return j;
}

namespace {

class CountingBackend : public agents::AgentBackend {
 public:
  explicit CountingBackend(agents::AgentBackend& inner) : inner_(inner) {}
  agents::AgentResponse complete(const agents::AgentRequest& r) override {
    ++calls;
    return inner_.complete(r);
  }
  std::atomic<std::size_t> calls{0};

 private:
  agents::AgentBackend& inner_;
};

class Artifacts {
 public:
  explicit Artifacts(const std::optional<fs::path>& dir) : dir_(dir) {
    if (dir_) prepare_output_dir(*dir_);
  }
  void write(const std::string& name, std::string_view text) const {
    if (dir_) write_new_file(*dir_ / name, text);
  }
  void write_json(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  std::optional<fs::path> dir_;
};

}  // namespace

LiftOutcome lift(const verus::VerusProgram& program, const ProofDocument& proof, std::string_view trace_text,
                 const LiftConfig& config, agents::AgentBackend& backend_in, VerusRunner& verus,
                 const std::optional<fs::path>& run_dir) {
  config.validate();
  Artifacts out(run_dir);
  CountingBackend backend(backend_in);
  LiftOutcome o;

  const auto levels = annotate_levels(proof, config.lenient);
  std::vector<RuleCategory> categories;
  for (auto c : kAllCategories)  // fixed checker order whatever the config order
    if (std::find(config.checker_categories.begin(), config.checker_categories.end(), c) != config.checker_categories.end())
      categories.push_back(c);
  std::vector<AggregatedSegments> segments;
  for (auto c : categories) segments.push_back(aggregate_segments(proof, c));

  // Stage 1: transformer-checker loop.
  std::string candidate = program.source;
  bool complete = false;
  for (std::uint32_t k = 1; k <= config.max_transform_loops && !complete; ++k) {
    LoopRecord rec;
    rec.loop = k;
    agents::TransformerInput in{program.source, trace_text, &proof, &levels, std::nullopt, false};
    if (k > 1) {
      in.previous_candidate = candidate;
      in.previous_incomplete = true;
    }
    bool transformed = true;
    try {
      candidate = agents::run_transformer(in, backend);
    } catch (const ProtocolError& e) {
      rec.notes.push_back(std::string("transformer: ") + e.what());
      transformed = false;
    }
    rec.candidate = candidate;

    bool all_complete = transformed;
    json verdicts = json::array();
    for (std::size_t i = 0; i < categories.size(); ++i) {
      agents::CheckerInput ci{categories[i], &segments[i], &proof, &levels, candidate};
      try {
        auto v = agents::run_checker(ci, backend);
        all_complete = all_complete && v.complete();
        verdicts.push_back(to_json(v));
        rec.verdicts.push_back(std::move(v));
      } catch (const ProtocolError& e) {
        all_complete = false;
        rec.notes.push_back(std::string("checker ") + std::string(z3proof::to_string(categories[i])) + ": " + e.what());
        verdicts.push_back({{"category", z3proof::to_string(categories[i])}, {"status", "protocol-error"}, {"error", e.what()}});
      }
    }
    rec.complete = all_complete;
    complete = all_complete;
    o.transform_loops_used = k;
    out.write("stage1_loop" + std::to_string(k) + ".rs", candidate);
    out.write_json("verdicts_loop" + std::to_string(k) + ".json", json{{"loop", k}, {"complete", all_complete}, {"verdicts", verdicts}, {"notes", rec.notes}});
    o.loops.push_back(std::move(rec));
  }

  auto finish = [&](LiftStatus status) {
    o.status = status;
    o.final_program = candidate;
    o.agent_calls = backend.calls;
    out.write_json("outcome.json", outcome_json(o));
    return o;
  };

  try {
    // Stage 2: pruning, then a verification of what is left.
    try {
      o.prune = agents::run_pruner(candidate, backend);
      candidate = o.prune->pruned;
      out.write_json("pruner_decision.json", to_json(o.prune->decision));
    } catch (const ProtocolError& e) {
      o.notes.push_back(std::string("pruner: ") + e.what() + "; keeping the unpruned candidate");
      out.write_json("pruner_decision.json", json{{"error", e.what()}});
    }
    o.pruned_program = candidate;
    out.write("stage2_pruned.rs", candidate);
    auto diag = verus.run(candidate, VerusMode::Verify);
    o.pruned_diagnostics = diag;
    out.write_json("stage2_diagnostics.json", to_json(diag));

    // Stage 3: repair until it verifies, the cap is hit, or the agent stalls.
    std::optional<std::string> previous_output;
    bool stalled = false;
    while (!diag.verified && o.repair_iters_used < config.max_repair_iters) {
      RepairRecord rec;
      rec.iter = ++o.repair_iters_used;
      std::optional<std::string> repaired;
      try {
        repaired = agents::run_repair(candidate, diag, backend);
      } catch (const ProtocolError& e) {
        rec.notes.push_back(std::string("repair: ") + e.what());
      }
      if (repaired) {
        if (previous_output && *previous_output == *repaired) {
          rec.notes.push_back("repair output identical to the previous one; stopping");
          stalled = true;
        }
        previous_output = repaired;
        candidate = *repaired;
        if (!stalled) diag = verus.run(candidate, VerusMode::Verify);
      }
      rec.program = candidate;
      rec.diagnostics = diag;
      out.write("stage3_iter" + std::to_string(rec.iter) + ".rs", candidate);
      out.write_json("stage3_iter" + std::to_string(rec.iter) + "_diagnostics.json", to_json(diag));
      o.repairs.push_back(std::move(rec));
      if (stalled) break;
    }
    o.final_diagnostics = diag;
    if (!complete) return finish(LiftStatus::IncompleteAfterCap);
    return finish(diag.verified ? LiftStatus::Lifted : LiftStatus::RepairFailedAfterCap);
  } catch (const VerusUnavailable& e) {
    o.notes.push_back(e.what());
    return finish(LiftStatus::VerusUnavailable);
  }
}

}  // namespace vcot::pipeline
