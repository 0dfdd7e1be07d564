#include "vcot/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::eval {

using nlohmann::json;
using benchgen::BenchSuite;
using benchgen::Dimension;
using benchgen::TaskDescriptor;

int rate(bool syn_ok, bool sem_ok) {
  if (sem_ok) return syn_ok ? 3 : 2;
  return syn_ok ? 1 : 0;
}

AccuracyReport accuracy_from_levels(const std::array<std::size_t, 4>& levels) {
  AccuracyReport r;
  r.levels = levels;
  r.n = levels[0] + levels[1] + levels[2] + levels[3];
  if (r.n == 0) throw EmptySet("accuracy over an empty record set");
  const double n = static_cast<double>(r.n);
  r.acc = (levels[3] + 0.5 * levels[2] + 0.25 * levels[1]) / n * 100.0;
  r.syn_acc = static_cast<double>(levels[3] + levels[1]) / n * 100.0;
  r.sem_acc = static_cast<double>(levels[3] + levels[2]) / n * 100.0;
  return r;
}

AccuracyReport accuracy(const std::vector<CompletionRecord>& records) {
  std::array<std::size_t, 4> levels{};
  for (const auto& r : records) {
    if (!r.level) throw std::invalid_argument("record " + r.task_id + " is not rated");
    ++levels.at(static_cast<std::size_t>(*r.level));
  }
  return accuracy_from_levels(levels);
}

std::vector<BreakdownRow> breakdown(const std::vector<CompletionRecord>& records, const BenchSuite& suite) {
  using Key = std::pair<std::string, std::string>;  // axis, group
  std::map<std::string, std::map<Key, std::array<std::size_t, 4>>> per_model;
  std::map<std::string, std::array<std::size_t, 4>> model_totals;
  std::array<std::size_t, 4> total{};

  auto axis_rank = [](const std::string& a) { return a == "ratio" ? 0 : a == "type" ? 1 : 2; };

  for (const auto& r : records) {
    const auto* t = suite.find(r.task_id);
    if (!t) throw UnknownTask(r.task_id);
    if (!r.level) throw std::invalid_argument("record " + r.task_id + " is not rated");
    auto lv = static_cast<std::size_t>(*r.level);
    std::string axis(benchgen::to_string(t->dimension()));
    std::string group = t->group().substr(axis.size() + 1);
    ++per_model[r.model_id][{axis, group}][lv];
    ++model_totals[r.model_id][lv];
    ++total[lv];
  }

  std::vector<BreakdownRow> rows;
  for (auto& [model, groups] : per_model) {
    std::vector<std::pair<Key, std::array<std::size_t, 4>>> ordered(groups.begin(), groups.end());
    std::stable_sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
      int ra = axis_rank(a.first.first), rb = axis_rank(b.first.first);
      if (ra != rb) return ra < rb;
      if (ra == 0) return std::stoi(a.first.second) < std::stoi(b.first.second);
      if (ra == 1) {
        static const std::vector<std::string> kinds{"invariant", "assertion", "lemma"};
        return std::find(kinds.begin(), kinds.end(), a.first.second) < std::find(kinds.begin(), kinds.end(), b.first.second);
      }
      static const std::vector<std::string> zones{"front", "middle", "end"};
      return std::find(zones.begin(), zones.end(), a.first.second) < std::find(zones.begin(), zones.end(), b.first.second);
    });
    for (const auto& [key, levels] : ordered) rows.push_back({key.first, key.second, model, accuracy_from_levels(levels)});
    rows.push_back({"model", model, model, accuracy_from_levels(model_totals[model])});
  }
  if (!records.empty()) rows.push_back({"total", "all", "*", accuracy_from_levels(total)});
  return rows;
}

std::string breakdown_csv(const std::vector<BreakdownRow>& rows) {
  std::string out = "axis,group,model,n,n0,n1,n2,n3,syn_acc,sem_acc,acc\n";
  for (const auto& r : rows) {
    const auto& a = r.report;
    out += r.axis + "," + r.group + "," + r.model + "," + std::to_string(a.n);
    for (auto c : a.levels) out += "," + std::to_string(c);
    out += "," + format_percent(a.syn_acc) + "," + format_percent(a.sem_acc) + "," + format_percent(a.acc) + "\n";
  }
  return out;
}

std::vector<std::size_t> apportion(const std::vector<std::size_t>& sizes, std::size_t n) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  std::vector<std::size_t> out(sizes.size(), 0);
  if (n == 0 || total == 0) return out;
  // quota_i = n * s_i / total; compare remainders as integers.
  std::vector<std::size_t> rem(sizes.size());
  std::size_t given = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    out[i] = n * sizes[i] / total;
    rem[i] = n * sizes[i] % total;
    given += out[i];
  }
  std::vector<std::size_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; given < n; ++k, ++given) ++out[order[k]];
  return out;
}

std::vector<std::string> stratified_sample(const BenchSuite& suite, std::size_t n, std::uint64_t seed) {
  if (n > suite.tasks.size())
    throw std::invalid_argument("sample of " + std::to_string(n) + " exceeds suite of " + std::to_string(suite.tasks.size()));
  std::vector<std::vector<std::size_t>> strata(3);
  for (std::size_t i = 0; i < suite.tasks.size(); ++i) strata[static_cast<std::size_t>(suite.tasks[i].dimension())].push_back(i);
  std::vector<std::size_t> sizes;
  for (const auto& s : strata) sizes.push_back(s.size());
  auto counts = apportion(sizes, n);

  std::vector<std::size_t> picked;
  for (std::size_t d = 0; d < strata.size(); ++d) {
    Rng rng(mix_seed(seed, d));
    for (auto j : rng.sample_without_replacement(strata[d].size(), counts[d])) picked.push_back(strata[d][j]);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<std::string> ids;
  for (auto i : picked) ids.push_back(suite.tasks[i].task_id);
  return ids;
}

SyntaxResult check_syntax(std::string_view candidate_source, pipeline::VerusRunner& verus) {
  auto d = verus.run(candidate_source, VerusMode::SyntaxOnly);
  SyntaxResult r;
  r.timed_out = d.timed_out();
  r.ok = d.errors.empty() && !r.timed_out;
  for (const auto& e : d.errors) r.errors.push_back((e.line ? "line " + std::to_string(e.line) + ": " : std::string()) + e.message);
  return r;
}

namespace {

std::string original_program(const TaskDescriptor& t) {
  return verus::splice_completion(t.masked, verus::ground_truth_completion(t.masked));
}

std::vector<std::string> truth_blocks(const TaskDescriptor& t) {
  std::vector<std::string> out;
  for (const auto& [id, text] : t.ground_truth) out.push_back(text);
  return out;
}

}  // namespace

CompletionRecord evaluate_one(const TaskDescriptor& task, CompletionRecord r, pipeline::VerusRunner& verus,
                              agents::AgentBackend& judge, bool per_block) {
  r.candidate_source.clear();
  r.missing_hole = false;
  try {
    r.candidate_source = verus::splice_completion(task.masked, r.completion);
  } catch (const MissingHoleKey& e) {
    r.missing_hole = true;
    r.syntax_errors = {e.what()};
  }

  if (r.missing_hole) {
    r.syn_ok = false;
  } else {
    auto syn = check_syntax(r.candidate_source, verus);
    r.syn_ok = syn.ok;
    r.syntax_timed_out = syn.timed_out;
    r.syntax_errors = std::move(syn.errors);
  }

  const std::string tag = task.task_id + "/" + r.model_id;
  r.identity = !r.missing_hole &&
               verus::normalize_whitespace(r.candidate_source) == verus::normalize_whitespace(original_program(task));
  if (r.identity) {
    r.sem_ok = true;
    r.judge_rationale = "spliced program is identical to the ground truth up to whitespace";
  } else {
    auto v = agents::run_judge(truth_blocks(task), r.completion, task.masked.source, judge, tag);
    r.sem_ok = v.semantically_correct;
    r.judge_rationale = v.rationale;
  }
  r.level = rate(*r.syn_ok, *r.sem_ok);

  r.per_block.clear();
  if (per_block) {
    auto fills = verus::parse_completion(r.completion);
    for (const auto& [id, truth] : task.ground_truth) {
      std::string fill;
      for (const auto& h : task.masked.holes)
        if (h.block_id == id)
          if (auto it = fills.find(h.key); it != fills.end()) fill += it->second;
      r.per_block[id] =
          agents::run_judge({truth}, fill, task.masked.source, judge, tag + "/block-" + std::to_string(id)).semantically_correct;
    }
  }
  return r;
}

std::vector<CompletionRecord> evaluate(const BenchSuite& suite, std::vector<CompletionRecord> records, pipeline::VerusRunner& verus,
                                       agents::AgentBackend& judge, EvalOptions options) {
  std::vector<const TaskDescriptor*> tasks;
  for (const auto& r : records) {
    const auto* t = suite.find(r.task_id);
    if (!t) throw UnknownTask(r.task_id);
    tasks.push_back(t);
  }
  auto work = [&](std::size_t i) { records[i] = evaluate_one(*tasks[i], std::move(records[i]), verus, judge, options.per_block); };

  unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(records.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i) work(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next++) < records.size();) {
        {
          std::lock_guard lock(error_mutex);
          if (error) return;
        }
        try {
          work(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return records;
}

namespace {

template <class F>
void for_each_json_line(const std::filesystem::path& path, F f) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<CompletionRecord> read_completions(const std::filesystem::path& path) {
  std::vector<CompletionRecord> out;
  for_each_json_line(path, [&](const json& j) {
    CompletionRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.model_id = j.value("model_id", std::string("model"));
    r.completion = j.at("completion").get<std::string>();
    out.push_back(std::move(r));
  });
  return out;
}

json record_to_json(const CompletionRecord& r) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  json j = {{"task_id", r.task_id},
            {"model_id", r.model_id},
            {"completion", r.completion},
            {"candidate_source", r.candidate_source},
            {"syn_ok", opt(r.syn_ok)},
            {"sem_ok", opt(r.sem_ok)},
            {"level", opt(r.level)},
            {"missing_hole", r.missing_hole},
            {"syntax_timed_out", r.syntax_timed_out},
            {"identity", r.identity},
            {"judge_rationale", r.judge_rationale},
            {"syntax_errors", r.syntax_errors}};
  if (!r.per_block.empty()) {
    json pb = json::object();
    for (const auto& [id, ok] : r.per_block) pb[std::to_string(id)] = ok;
    j["per_block"] = pb;
  }
  return j;
}

CompletionRecord record_from_json(const json& j) {
  CompletionRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.completion = j.value("completion", std::string());
  r.candidate_source = j.value("candidate_source", std::string());
  if (j.contains("syn_ok") && !j["syn_ok"].is_null()) r.syn_ok = j["syn_ok"].get<bool>();
  if (j.contains("sem_ok") && !j["sem_ok"].is_null()) r.sem_ok = j["sem_ok"].get<bool>();
  if (j.contains("level") && !j["level"].is_null()) r.level = j["level"].get<int>();
  if (r.level && (!r.syn_ok || !r.sem_ok || *r.level != rate(*r.syn_ok, *r.sem_ok)))
    throw Error("record " + r.task_id + ": level disagrees with syn_ok/sem_ok");
  r.missing_hole = j.value("missing_hole", false);
  r.syntax_timed_out = j.value("syntax_timed_out", false);
  r.identity = j.value("identity", false);
  r.judge_rationale = j.value("judge_rationale", std::string());
  r.syntax_errors = j.value("syntax_errors", std::vector<std::string>{});
  if (j.contains("per_block"))
    for (const auto& [id, ok] : j["per_block"].items()) r.per_block[static_cast<verus::BlockId>(std::stoul(id))] = ok.get<bool>();
  return r;
}

std::vector<CompletionRecord> read_records(const std::filesystem::path& path) {
  std::vector<CompletionRecord> out;
  for_each_json_line(path, [&](const json& j) { out.push_back(record_from_json(j)); });
  return out;
}

std::string records_jsonl(const std::vector<CompletionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

json report_json(const AccuracyReport& r) {
  return {{"n", r.n},
          {"levels", r.levels},
          {"syn_acc", format_percent(r.syn_acc)},
          {"sem_acc", format_percent(r.sem_acc)},
          {"acc", format_percent(r.acc)}};
}

std::vector<LabeledItem> read_labels(const std::filesystem::path& path) {
  std::vector<LabeledItem> out;
  for_each_json_line(path, [&](const json& j) {
    out.push_back({j.at("task_id").get<std::string>(), j.at("completion").get<std::string>(), j.at("label").get<bool>()});
  });
  return out;
}

MetaEvalResult meta_evaluate(const BenchSuite& suite, const std::vector<LabeledItem>& labels, agents::AgentBackend& judge) {
  MetaEvalResult res;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& item = labels[i];
    const auto* t = suite.find(item.task_id);
    if (!t) throw UnknownTask(item.task_id);
    auto v = agents::run_judge(truth_blocks(*t), item.completion, t->masked.source, judge,
                               item.task_id + "/label-" + std::to_string(i + 1));
    res.agreements += v.semantically_correct == item.label;
    res.items.push_back({item, v.semantically_correct, v.rationale});
  }
  return res;
}

}  // namespace vcot::eval
