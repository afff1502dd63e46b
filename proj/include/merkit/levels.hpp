#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace merkit {

// Structural granularity of a dataset sample.
enum class SampleLevel { Line, Paragraph, Page };

inline constexpr std::array<SampleLevel, 3> kAllLevels = {SampleLevel::Line, SampleLevel::Paragraph,
                                                          SampleLevel::Page};

// "line" / "paragraph" / "page": the tag used in files and canonical keys.
std::string_view level_tag(SampleLevel level);

// "Line" / "Paragraph" / "Page": the column title used in reports.
std::string_view level_title(SampleLevel level);

// Accepts either spelling, case-insensitive.
std::optional<SampleLevel> parse_level(std::string_view text);

constexpr std::size_t level_index(SampleLevel level) { return static_cast<std::size_t>(level); }

}  // namespace merkit
