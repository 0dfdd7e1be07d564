#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vcot/verus_model.hpp"

namespace vcot::benchgen {

enum class Dimension : std::uint8_t { Ratio, Type, Loc };
enum class Zone : std::uint8_t { Front, Middle, End };

std::string_view to_string(Dimension d);
std::string_view to_string(Zone z);
std::optional<Dimension> parse_dimension(std::string_view s);
std::optional<Zone> parse_zone(std::string_view s);

/// Zone of block `order_index` among `block_count` blocks, by the position
/// (i + 0.5) / M: Front below 1/3, End from 2/3 on, Middle otherwise.
/// Evaluated in integers, so boundary cases are exact.
Zone zone_of(std::uint32_t order_index, std::size_t block_count);

/// k/N rounded to the nearest 10 percent (halves up), never below 10.
int ratio_bucket(std::size_t removed, std::size_t total);

struct RatioVariant {
  std::uint32_t removed_count;
  std::uint32_t total_blocks;
  std::uint64_t seed;  // seed of this task's draw
  double ratio() const { return static_cast<double>(removed_count) / total_blocks; }
};

struct TypeVariant {
  verus::BlockKind kind;
};

struct LocVariant {
  Zone zone;
};

using Variant = std::variant<RatioVariant, TypeVariant, LocVariant>;

struct TaskDescriptor {
  std::string task_id;
  std::string program_id;
  Variant variant;
  std::set<verus::BlockId> removed_block_ids;
  verus::MaskedProgram masked;
  std::map<verus::BlockId, std::string> ground_truth;
  std::uint64_t suite_seed = 0;

  Dimension dimension() const { return static_cast<Dimension>(variant.index()); }
  /// "ratio-40", "type-invariant", "loc-front": the reporting group.
  std::string group() const;
};

struct CorpusProgram {
  std::string id;
  verus::VerusProgram program;
  std::vector<verus::SemanticBlock> blocks;
};

CorpusProgram make_corpus_program(std::string id, std::string source);

/// Every `*.rs` file in `dir`, sorted by name; the id is the file stem.
/// Throws EmptyCorpus when there is none.
std::vector<CorpusProgram> load_corpus(const std::filesystem::path& dir);

/// N tasks; task k removes k blocks drawn uniformly without replacement.
/// Throws EmptyProgram when there are no blocks.
std::vector<TaskDescriptor> gen_ratio(const CorpusProgram& p, std::uint64_t seed, verus::RemovalOptions options = {});
std::vector<TaskDescriptor> gen_type(const CorpusProgram& p, std::uint64_t seed = 0, verus::RemovalOptions options = {});
std::vector<TaskDescriptor> gen_loc(const CorpusProgram& p, std::uint64_t seed = 0, verus::RemovalOptions options = {});

struct Composition {
  std::size_t programs = 0;
  std::vector<std::string> skipped;  // programs without blocks
  std::map<Dimension, std::size_t> per_dimension;
  std::map<int, std::size_t> ratio_buckets;
  std::map<std::string, std::size_t> type_kinds;
  std::map<std::string, std::size_t> loc_zones;
  std::size_t total = 0;

  nlohmann::json to_json() const;
};

struct BenchSuite {
  std::uint64_t seed = 0;
  bool markers = false;
  std::vector<TaskDescriptor> tasks;  // by program, then dimension, then variant
  Composition composition;

  const TaskDescriptor* find(std::string_view task_id) const;
};

/// Pure function of its arguments; `jobs` only changes how fast.
BenchSuite build_suite(const std::vector<CorpusProgram>& corpus, std::uint64_t seed, verus::RemovalOptions options = {},
                       unsigned jobs = 1);

nlohmann::json task_to_json(const TaskDescriptor& t);
TaskDescriptor task_from_json(const nlohmann::json& j);

/// Writes suite.jsonl, composition.json and tasks/<id>/{masked.rs,holes.json,ground_truth.md}.
void write_suite(const BenchSuite& suite, const std::filesystem::path& dir);
BenchSuite read_suite(const std::filesystem::path& dir);

}  // namespace vcot::benchgen
