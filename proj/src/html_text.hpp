#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace merkit::detail {

// Plain-text rendering of a page body in which formula delimiters are searched.
// Every byte of `text` remembers the body range it came from, so spans found in
// the view map back to body offsets. Paragraph boundaries are blank lines.
struct TextView {
  std::string text;
  std::vector<std::size_t> origin_begin;
  std::vector<std::size_t> origin_end;

  // Body offset range covered by view bytes [first, last).
  std::size_t body_begin(std::size_t first) const { return origin_begin[first]; }
  std::size_t body_end(std::size_t last) const { return origin_end[last - 1]; }

  // View index of the first byte whose origin starts at or after `offset`.
  std::size_t view_index_at(std::size_t offset) const;
  // One past the last view byte whose origin ends at or before `offset`.
  std::size_t view_index_until(std::size_t offset) const;
};

// Tags stripped, <script>/<style> dropped, block tags become blank lines, entities decoded.
TextView html_text_view(std::string_view body);

// Identity view except that code fences and inline code spans are blanked out.
TextView markdown_text_view(std::string_view body);

}  // namespace merkit::detail
