#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace merkit::utf8 {

// Length in bytes of the UTF-8 sequence starting at s[pos]. Malformed lead or
// continuation bytes count as a single byte so that every input can be walked.
std::size_t sequence_length(std::string_view s, std::size_t pos);

// Decodes to Unicode scalar values. Malformed bytes decode to U+FFFD.
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);

// Number of scalar values, using the same walking rule as sequence_length.
std::size_t count_scalars(std::string_view s);

}  // namespace merkit::utf8
