#include "merkit/levels.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace merkit {

std::string_view level_tag(SampleLevel level) {
  switch (level) {
    case SampleLevel::Line: return "line";
    case SampleLevel::Paragraph: return "paragraph";
    case SampleLevel::Page: return "page";
  }
  return "line";
}

std::string_view level_title(SampleLevel level) {
  switch (level) {
    case SampleLevel::Line: return "Line";
    case SampleLevel::Paragraph: return "Paragraph";
    case SampleLevel::Page: return "Page";
  }
  return "Line";
}

std::optional<SampleLevel> parse_level(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (SampleLevel level : kAllLevels) {
    if (lower == level_tag(level)) return level;
  }
  return std::nullopt;
}

}  // namespace merkit
