#include "vcot/sections.hpp"

#include <cctype>

#include "vcot/util.hpp"

namespace vcot {

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ' ';
}

std::string normalize_name(std::string_view raw) {
  std::string out;
  bool space = false;
  for (char c : trim(raw)) {
    if (c == ' ' || c == '_' || c == '\t') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

bool valid_name(std::string_view name) {
  if (name.empty() || name.size() > 40) return false;
  if (!std::isalpha(static_cast<unsigned char>(name.front()))) return false;
  for (char c : name)
    if (!is_name_char(c)) return false;
  return true;
}

// `NAME: text` may carry its body on the header line; that text is put in
// `inline_rest`.
std::optional<std::string> header_name(std::string_view line, std::string_view* inline_rest = nullptr) {
  auto t = trim(line);
  if (t.empty()) return std::nullopt;
  if (t.front() == '#') {
    std::size_t i = 0;
    while (i < t.size() && t[i] == '#') ++i;
    if (i > 6 || i >= t.size() || t[i] != ' ') return std::nullopt;
    auto name = trim(t.substr(i));
    if (!name.empty() && name.back() == ':') name.remove_suffix(1);
    if (!valid_name(trim(name))) return std::nullopt;
    return normalize_name(name);
  }
  if (t.front() == '[' && t.back() == ']') {
    auto name = trim(t.substr(1, t.size() - 2));
    if (!valid_name(name)) return std::nullopt;
    return normalize_name(name);
  }
  if (auto colon = t.find(':'); colon != std::string_view::npos) {
    auto name = trim(t.substr(0, colon));
    if (inline_rest) *inline_rest = trim(t.substr(colon + 1));
    // bare `NAME:` headers must be upper case to avoid catching prose
    if (!valid_name(name)) return std::nullopt;
    for (char c : name)
      if (std::islower(static_cast<unsigned char>(c))) return std::nullopt;
    return normalize_name(name);
  }
  return std::nullopt;
}

bool is_fence(std::string_view line, std::string_view* info = nullptr) {
  auto t = trim(line);
  if (t.size() >= 3 && (t.substr(0, 3) == "```" || t.substr(0, 3) == "~~~")) {
    if (info) *info = trim(t.substr(3));
    return true;
  }
  return false;
}

}  // namespace

std::vector<Section> parse_sections(std::string_view text) {
  std::vector<Section> out;
  auto lines = split_lines(text);

  Section* current = nullptr;
  std::string raw;
  bool have_fence_body = false;

  auto close = [&] {
    if (current && !have_fence_body) current->body = std::string(trim(raw));
    current = nullptr;
    raw.clear();
    have_fence_body = false;
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = lines[i];
    std::string_view info;
    if (is_fence(line, &info)) {
      // gather the fenced block
      std::string body;
      std::size_t j = i + 1;
      for (; j < lines.size(); ++j) {
        if (is_fence(lines[j]) && trim(lines[j]).size() == 3) break;
        body.append(lines[j]);
        body.push_back('\n');
      }
      auto info_name = normalize_name(info);
      bool info_is_key = valid_name(info) && !info.empty() &&
                         std::isupper(static_cast<unsigned char>(trim(info).front()));
      if (info_is_key && (!current || current->name != info_name)) {
        close();
        out.push_back({info_name, body, true});
      } else if (current && !have_fence_body) {
        current->body = body;
        current->fenced = true;
        have_fence_body = true;
      } else if (current) {
        // a second fence inside one section is kept only in the raw text
      }
      i = j;
      continue;
    }
    std::string_view rest;
    if (auto name = header_name(line, &rest)) {
      close();
      out.push_back({*name, "", false});
      current = &out.back();
      if (!rest.empty()) {
        raw.append(rest);
        raw.push_back('\n');
      }
      continue;
    }
    if (current && !have_fence_body) {
      raw.append(line);
      raw.push_back('\n');
    }
  }
  close();
  return out;
}

const Section* find_section(const std::vector<Section>& sections, std::string_view name) {
  auto key = normalize_name(name);
  for (const auto& s : sections)
    if (s.name == key) return &s;
  return nullptr;
}

std::string render_section(std::string_view name, std::string_view body, std::string_view lang) {
  std::string out = "### ";
  out.append(name);
  out.append("\n```");
  out.append(lang);
  out.push_back('\n');
  out.append(body);
  if (!body.empty() && body.back() != '\n') out.push_back('\n');
  out.append("```\n");
  return out;
}

}  // namespace vcot
