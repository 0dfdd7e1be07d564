#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace vcot {

std::string read_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories. Refuses to
/// overwrite an existing file: run outputs are write-once.
void write_new_file(const std::filesystem::path& path, std::string_view content);

/// Fails unless `dir` is absent or an empty directory; creates it.
void prepare_output_dir(const std::filesystem::path& dir);

std::vector<std::string_view> split_lines(std::string_view text);
std::string_view trim(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

/// Number of lines in `text`; a trailing newline does not open a new line.
std::size_t count_lines(std::string_view text);

std::string sha256_hex(std::string_view data);

/// Percent value rounded to two decimals, as printed in reports.
std::string format_percent(double value);

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t fnv1a(std::string_view s);

/// Deterministic across standard libraries: the engine is fixed by the
/// standard and bounded draws are done here rather than through
/// std::uniform_int_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// `count` distinct indices from [0, n), uniformly, in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::mt19937_64 engine_;
};

}  // namespace vcot
