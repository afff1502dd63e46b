#include "merkit/metrics.hpp"
#include "merkit/utf8.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

namespace merkit {

namespace {

constexpr std::uint64_t kHighBit = 1ULL << 63;

// Myers' bit-vector algorithm in Hyyrö's global-distance form, split into 64-row
// blocks. `pattern` is the shorter string; rows are pattern positions.
std::size_t bit_parallel_distance(std::u32string_view pattern, std::u32string_view text) {
  const std::size_t m = pattern.size();
  const std::size_t blocks = (m + 63) / 64;

  std::unordered_map<char32_t, std::size_t> alphabet;
  for (char32_t c : pattern) alphabet.try_emplace(c, alphabet.size());
  std::vector<std::uint64_t> peq(alphabet.size() * blocks, 0);
  for (std::size_t i = 0; i < m; ++i) {
    peq[alphabet[pattern[i]] * blocks + i / 64] |= 1ULL << (i % 64);
  }
  const std::vector<std::uint64_t> no_match(blocks, 0);

  std::vector<std::uint64_t> pv(blocks, ~0ULL);
  std::vector<std::uint64_t> mv(blocks, 0);
  const std::uint64_t last_bit = 1ULL << ((m - 1) % 64);
  std::size_t score = m;

  for (char32_t c : text) {
    const auto it = alphabet.find(c);
    const std::uint64_t* eq_row = it == alphabet.end() ? no_match.data() : &peq[it->second * blocks];
    int hin = 1;  // top row of the global DP grows by one per column
    for (std::size_t b = 0; b < blocks; ++b) {
      std::uint64_t eq = eq_row[b];
      const std::uint64_t p = pv[b];
      const std::uint64_t n = mv[b];
      const std::uint64_t xv = eq | n;
      if (hin < 0) eq |= 1;
      const std::uint64_t xh = (((eq & p) + p) ^ p) | eq;
      std::uint64_t ph = n | ~(xh | p);
      std::uint64_t mh = p & xh;
      const std::uint64_t out_bit = b + 1 == blocks ? last_bit : kHighBit;
      const int hout = (ph & out_bit) ? 1 : ((mh & out_bit) ? -1 : 0);
      ph <<= 1;
      mh <<= 1;
      if (hin < 0) {
        mh |= 1;
      } else if (hin > 0) {
        ph |= 1;
      }
      pv[b] = mh | ~(xv | ph);
      mv[b] = ph & xv;
      hin = hout;
    }
    score = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(score) + hin);
  }
  return score;
}

}  // namespace

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  while (!a.empty() && !b.empty() && a.front() == b.front()) {
    a.remove_prefix(1);
    b.remove_prefix(1);
  }
  while (!a.empty() && !b.empty() && a.back() == b.back()) {
    a.remove_suffix(1);
    b.remove_suffix(1);
  }
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  return a.size() <= b.size() ? bit_parallel_distance(a, b) : bit_parallel_distance(b, a);
}

std::string ed_text(std::string_view latex, const EdOptions& options) {
  if (options.normalize) {
    if (auto canonical = latex::canonical_form(latex, options.normalization)) return *canonical;
  }
  return std::string(latex);
}

EdScore edit_distance(std::string_view pred, std::string_view gt, const EdOptions& options) {
  const std::u32string p = utf8::decode(ed_text(pred, options));
  const std::u32string g = utf8::decode(ed_text(gt, options));
  const std::size_t longest = std::max(p.size(), g.size());
  if (longest == 0) return {0.0};
  return {static_cast<double>(levenshtein(p, g)) / static_cast<double>(longest)};
}

}  // namespace merkit
