#pragma once

#include <map>
#include <string>
#include <string_view>

namespace vcot::assets {

/// Prompt templates, guidance, and judge material from assets/prompts,
/// keyed by file stem.
const std::map<std::string, std::string_view>& all();

}  // namespace vcot::assets
