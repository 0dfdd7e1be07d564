#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vcot {

/// One keyed section of a structured agent or model answer.
struct Section {
  std::string name;  // upper-cased, inner whitespace collapsed
  std::string body;  // contents of the first fenced block, else the trimmed raw text
  bool fenced = false;
};

/// Tolerant reader for keyed sections. A section opens with a header line
/// (`### NAME`, `NAME:`, or `[NAME]`) or with a fence whose info string is
/// the name (```PROGRAM). Header-looking lines inside fences are ignored.
std::vector<Section> parse_sections(std::string_view text);

const Section* find_section(const std::vector<Section>& sections, std::string_view name);

/// Renders `### NAME` followed by a fenced body.
std::string render_section(std::string_view name, std::string_view body, std::string_view lang = "");

}  // namespace vcot
