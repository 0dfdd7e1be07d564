#include "vcot/benchgen.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "vcot/error.hpp"
#include "vcot/util.hpp"

namespace vcot::benchgen {

using nlohmann::json;
using verus::BlockId;
using verus::BlockKind;
namespace fs = std::filesystem;

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Ratio: return "ratio";
    case Dimension::Type: return "type";
    case Dimension::Loc: return "loc";
  }
  return "?";
}

std::string_view to_string(Zone z) {
  switch (z) {
    case Zone::Front: return "front";
    case Zone::Middle: return "middle";
    case Zone::End: return "end";
  }
  return "?";
}

std::optional<Dimension> parse_dimension(std::string_view s) {
  for (auto d : {Dimension::Ratio, Dimension::Type, Dimension::Loc})
    if (to_string(d) == s) return d;
  return std::nullopt;
}

std::optional<Zone> parse_zone(std::string_view s) {
  for (auto z : {Zone::Front, Zone::Middle, Zone::End})
    if (to_string(z) == s) return z;
  return std::nullopt;
}

Zone zone_of(std::uint32_t i, std::size_t m) {
  // (2i+1)/(2M) < 1/3  <=>  3(2i+1) < 2M;   >= 2/3  <=>  3(2i+1) >= 4M
  auto lhs = 3 * (2 * static_cast<std::uint64_t>(i) + 1);
  if (lhs < 2 * static_cast<std::uint64_t>(m)) return Zone::Front;
  if (lhs >= 4 * static_cast<std::uint64_t>(m)) return Zone::End;
  return Zone::Middle;
}

int ratio_bucket(std::size_t removed, std::size_t total) {
  auto tenths = static_cast<int>((20 * removed + total) / (2 * total));
  return std::max(1, tenths) * 10;
}

std::string TaskDescriptor::group() const {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, RatioVariant>)
          return "ratio-" + std::to_string(ratio_bucket(v.removed_count, v.total_blocks));
        else if constexpr (std::is_same_v<V, TypeVariant>)
          return "type-" + std::string(verus::to_string(v.kind));
        else
          return "loc-" + std::string(to_string(v.zone));
      },
      variant);
}

CorpusProgram make_corpus_program(std::string id, std::string source) {
  CorpusProgram p;
  p.id = std::move(id);
  p.program = verus::annotate_regions(std::move(source));
  p.blocks = verus::segment_blocks(p.program);
  return p;
}

std::vector<CorpusProgram> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw EmptyCorpus("corpus directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".rs") files.push_back(e.path());
  if (files.empty()) throw EmptyCorpus("no .rs programs in " + dir.string());
  std::sort(files.begin(), files.end());
  std::vector<CorpusProgram> out;
  for (const auto& f : files) {
    try {
      out.push_back(make_corpus_program(f.stem().string(), read_file(f)));
    } catch (const ScanError& e) {
      throw ScanError(e.line(), f.filename().string() + ": " + e.what());
    }
  }
  return out;
}

namespace {

TaskDescriptor make_task(const CorpusProgram& p, std::string id, Variant v, std::set<BlockId> ids, std::uint64_t seed,
                         verus::RemovalOptions options) {
  TaskDescriptor t;
  t.task_id = std::move(id);
  t.program_id = p.id;
  t.variant = v;
  t.masked = verus::remove_blocks(p.program, p.blocks, ids, options);
  t.ground_truth = verus::ground_truth_by_block(t.masked);
  t.removed_block_ids = std::move(ids);
  t.suite_seed = seed;
  return t;
}

constexpr BlockKind kKindOrder[] = {BlockKind::InvariantBlock, BlockKind::AssertionBlock, BlockKind::LemmaBlock};

}  // namespace

std::vector<TaskDescriptor> gen_ratio(const CorpusProgram& p, std::uint64_t seed, verus::RemovalOptions options) {
  const auto n = p.blocks.size();
  if (n == 0) throw EmptyProgram("program " + p.id + " has no proof blocks");
  std::vector<TaskDescriptor> out;
  for (std::size_t k = 1; k <= n; ++k) {
    auto task_seed = mix_seed(mix_seed(seed, fnv1a(p.id)), k);
    Rng rng(task_seed);
    std::set<BlockId> ids;
    for (auto i : rng.sample_without_replacement(n, k)) ids.insert(p.blocks[i].id);
    RatioVariant v{static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(n), task_seed};
    out.push_back(make_task(p, p.id + "-ratio-" + std::to_string(k), v, std::move(ids), seed, options));
  }
  return out;
}

std::vector<TaskDescriptor> gen_type(const CorpusProgram& p, std::uint64_t seed, verus::RemovalOptions options) {
  std::vector<TaskDescriptor> out;
  for (auto kind : kKindOrder) {
    std::set<BlockId> ids;
    for (const auto& b : p.blocks)
      if (b.kind == kind) ids.insert(b.id);
    if (ids.empty()) continue;
    out.push_back(make_task(p, p.id + "-type-" + std::string(verus::to_string(kind)), TypeVariant{kind}, std::move(ids), seed,
                            options));
  }
  return out;
}

std::vector<TaskDescriptor> gen_loc(const CorpusProgram& p, std::uint64_t seed, verus::RemovalOptions options) {
  std::vector<TaskDescriptor> out;
  for (auto zone : {Zone::Front, Zone::Middle, Zone::End}) {
    std::set<BlockId> ids;
    for (const auto& b : p.blocks)
      if (zone_of(b.order_index, p.blocks.size()) == zone) ids.insert(b.id);
    if (ids.empty()) continue;
    out.push_back(make_task(p, p.id + "-loc-" + std::string(to_string(zone)), LocVariant{zone}, std::move(ids), seed, options));
  }
  return out;
}

json Composition::to_json() const {
  json dims = json::object();
  for (auto d : {Dimension::Ratio, Dimension::Type, Dimension::Loc}) {
    auto it = per_dimension.find(d);
    dims[std::string(benchgen::to_string(d))] = it == per_dimension.end() ? 0 : it->second;
  }
  json buckets = json::object();
  for (const auto& [b, n] : ratio_buckets) buckets[std::to_string(b)] = n;
  return {{"programs", programs},   {"skipped_programs", skipped}, {"tasks_per_dimension", dims},
          {"total", total},         {"ratio_buckets", buckets},    {"type_kinds", type_kinds},
          {"loc_zones", loc_zones}};
}

const TaskDescriptor* BenchSuite::find(std::string_view task_id) const {
  for (const auto& t : tasks)
    if (t.task_id == task_id) return &t;
  return nullptr;
}

BenchSuite build_suite(const std::vector<CorpusProgram>& corpus, std::uint64_t seed, verus::RemovalOptions options, unsigned jobs) {
  std::vector<std::vector<TaskDescriptor>> per_program(corpus.size());
  auto work = [&](std::size_t i) {
    const auto& p = corpus[i];
    if (p.blocks.empty()) return;
    auto& out = per_program[i];
    for (auto* gen : {&gen_ratio, &gen_type, &gen_loc})
      for (auto& t : (*gen)(p, seed, options)) out.push_back(std::move(t));
  };

  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return corpus[a].id < corpus[b].id; });

  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(corpus.size())));
  if (jobs == 1) {
    for (auto i : order) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next++) < order.size();) {
          try {
            work(order[k]);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  BenchSuite suite;
  suite.seed = seed;
  suite.markers = options.markers;
  auto& c = suite.composition;
  c.programs = corpus.size();
  for (auto i : order) {
    if (corpus[i].blocks.empty()) c.skipped.push_back(corpus[i].id);
    for (auto& t : per_program[i]) {
      ++c.per_dimension[t.dimension()];
      if (const auto* r = std::get_if<RatioVariant>(&t.variant)) ++c.ratio_buckets[ratio_bucket(r->removed_count, r->total_blocks)];
      if (const auto* ty = std::get_if<TypeVariant>(&t.variant)) ++c.type_kinds[std::string(verus::to_string(ty->kind))];
      if (const auto* l = std::get_if<LocVariant>(&t.variant)) ++c.loc_zones[std::string(to_string(l->zone))];
      suite.tasks.push_back(std::move(t));
    }
  }
  c.total = suite.tasks.size();
  return suite;
}

json task_to_json(const TaskDescriptor& t) {
  json variant;
  std::visit(
      [&](const auto& v) {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, RatioVariant>)
          variant = {{"removed_count", v.removed_count}, {"total_blocks", v.total_blocks}, {"ratio", v.ratio()},
                     {"seed", v.seed}};
        else if constexpr (std::is_same_v<V, TypeVariant>)
          variant = {{"kind", verus::to_string(v.kind)}};
        else
          variant = {{"zone", to_string(v.zone)}};
      },
      t.variant);
  json holes = json::array();
  for (const auto& h : t.masked.holes)
    holes.push_back({{"key", h.key},
                     {"block_id", h.block_id},
                     {"block_kind", verus::to_string(h.block_kind)},
                     {"offset", h.offset},
                     {"marker_length", h.marker_length},
                     {"whole_lines", h.whole_lines},
                     {"original_lines", {h.original_span.first_line, h.original_span.last_line}},
                     {"original_bytes", {h.original_span.begin, h.original_span.end}},
                     {"original_text", h.original_text}});
  json gt = json::object();
  for (const auto& [id, text] : t.ground_truth) gt[std::to_string(id)] = text;
  return {{"task_id", t.task_id},
          {"program_id", t.program_id},
          {"dimension", to_string(t.dimension())},
          {"group", t.group()},
          {"variant", variant},
          {"removed_block_ids", t.removed_block_ids},
          {"suite_seed", t.suite_seed},
          {"markers", t.masked.markers},
          {"masked_source", t.masked.source},
          {"holes", holes},
          {"ground_truth", gt}};
}

TaskDescriptor task_from_json(const json& j) {
  TaskDescriptor t;
  t.task_id = j.at("task_id").get<std::string>();
  t.program_id = j.at("program_id").get<std::string>();
  auto dim = parse_dimension(j.at("dimension").get<std::string>());
  if (!dim) throw Error("task " + t.task_id + ": unknown dimension");
  const auto& v = j.at("variant");
  switch (*dim) {
    case Dimension::Ratio:
      t.variant = RatioVariant{v.at("removed_count").get<std::uint32_t>(), v.at("total_blocks").get<std::uint32_t>(),
                               v.at("seed").get<std::uint64_t>()};
      break;
    case Dimension::Type: {
      auto k = verus::parse_block_kind(v.at("kind").get<std::string>());
      if (!k) throw Error("task " + t.task_id + ": unknown block kind");
      t.variant = TypeVariant{*k};
      break;
    }
    case Dimension::Loc: {
      auto z = parse_zone(v.at("zone").get<std::string>());
      if (!z) throw Error("task " + t.task_id + ": unknown zone");
      t.variant = LocVariant{*z};
      break;
    }
  }
  t.removed_block_ids = j.at("removed_block_ids").get<std::set<BlockId>>();
  t.suite_seed = j.at("suite_seed").get<std::uint64_t>();
  t.masked.markers = j.at("markers").get<bool>();
  t.masked.source = j.at("masked_source").get<std::string>();
  for (const auto& h : j.at("holes")) {
    verus::Hole hole;
    hole.key = h.at("key").get<std::string>();
    hole.block_id = h.at("block_id").get<BlockId>();
    auto k = verus::parse_block_kind(h.at("block_kind").get<std::string>());
    if (!k) throw Error("task " + t.task_id + ": unknown block kind");
    hole.block_kind = *k;
    hole.offset = h.at("offset").get<std::size_t>();
    hole.marker_length = h.at("marker_length").get<std::size_t>();
    hole.whole_lines = h.at("whole_lines").get<bool>();
    hole.original_span.first_line = h.at("original_lines").at(0).get<std::uint32_t>();
    hole.original_span.last_line = h.at("original_lines").at(1).get<std::uint32_t>();
    hole.original_span.begin = h.at("original_bytes").at(0).get<std::size_t>();
    hole.original_span.end = h.at("original_bytes").at(1).get<std::size_t>();
    hole.original_text = h.at("original_text").get<std::string>();
    t.masked.holes.push_back(std::move(hole));
  }
  for (const auto& [id, text] : j.at("ground_truth").items()) t.ground_truth[static_cast<BlockId>(std::stoul(id))] = text.get<std::string>();
  return t;
}

void write_suite(const BenchSuite& suite, const fs::path& dir) {
  prepare_output_dir(dir);
  std::string lines;
  for (const auto& t : suite.tasks) {
    lines += task_to_json(t).dump();
    lines += '\n';
    auto tdir = dir / "tasks" / t.task_id;
    write_new_file(tdir / "masked.rs", t.masked.source);
    json holes = task_to_json(t);
    holes.erase("masked_source");
    write_new_file(tdir / "holes.json", holes.dump(2) + "\n");
    write_new_file(tdir / "ground_truth.md", verus::ground_truth_completion(t.masked));
  }
  write_new_file(dir / "suite.jsonl", lines);
  json comp = suite.composition.to_json();
  comp["seed"] = suite.seed;
  comp["markers"] = suite.markers;
  write_new_file(dir / "composition.json", comp.dump(2) + "\n");
}

BenchSuite read_suite(const fs::path& dir) {
  std::ifstream in(dir / "suite.jsonl");
  if (!in) throw Error("no suite.jsonl in " + dir.string());
  BenchSuite suite;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      suite.tasks.push_back(task_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error((dir / "suite.jsonl").string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  if (fs::exists(dir / "composition.json")) {
    auto comp = json::parse(read_file(dir / "composition.json"));
    suite.seed = comp.value("seed", std::uint64_t{0});
    suite.markers = comp.value("markers", false);
    suite.composition.programs = comp.value("programs", std::size_t{0});
  }
  auto& c = suite.composition;
  for (const auto& t : suite.tasks) ++c.per_dimension[t.dimension()];
  c.total = suite.tasks.size();
  return suite;
}

}  // namespace vcot::benchgen
