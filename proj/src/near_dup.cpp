#include "merkit/near_dup.hpp"

#include "merkit/latex_lexer.hpp"
#include "merkit/utf8.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace merkit {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string> units(std::string_view text) {
  std::vector<std::string> out;
  if (auto seq = latex::try_tokenize(text)) {
    for (const auto& tok : latex::normalize(*seq).tokens) {
      out.push_back(std::string(latex::kind_name(tok.kind)) + ':' + tok.text);
    }
    return out;
  }
  for (char32_t cp : utf8::decode(text)) out.push_back(utf8::encode(std::u32string_view(&cp, 1)));
  return out;
}

}  // namespace

std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t n) {
  const std::vector<std::string> u = units(text);
  n = std::max<std::size_t>(1, n);
  std::vector<std::uint64_t> out;
  const std::size_t count = u.size() >= n ? u.size() - n + 1 : 1;
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t k = i; k < std::min(i + n, u.size()); ++k) {
      h = fnv1a(u[k], h);
      h = fnv1a(std::string_view("\x1f", 1), h);
    }
    out.push_back(h);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

MinHasher::MinHasher(std::size_t num_perm, std::uint64_t seed) {
  salts_.reserve(num_perm);
  for (std::size_t k = 0; k < num_perm; ++k) salts_.push_back(mix(seed + k));
}

std::vector<std::uint64_t> MinHasher::signature(const std::vector<std::uint64_t>& shingles) const {
  std::vector<std::uint64_t> sig(salts_.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t s : shingles) {
    for (std::size_t k = 0; k < salts_.size(); ++k) sig[k] = std::min(sig[k], mix(s ^ salts_[k]));
  }
  return sig;
}

NearDupIndex::NearDupIndex(const NearDupOptions& options)
    : options_(options), hasher_(options.num_perm, options.seed), buckets_(options.bands) {
  if (options.bands == 0 || options.num_perm % options.bands != 0) {
    throw std::invalid_argument("num_perm must be a positive multiple of bands");
  }
}

std::vector<std::uint64_t> NearDupIndex::band_keys(const std::vector<std::uint64_t>& shingles) const {
  const auto sig = hasher_.signature(shingles);
  const std::size_t rows = options_.num_perm / options_.bands;
  std::vector<std::uint64_t> keys(options_.bands);
  for (std::size_t b = 0; b < options_.bands; ++b) {
    std::uint64_t h = b;
    for (std::size_t r = 0; r < rows; ++r) h = mix(h ^ sig[b * rows + r]);
    keys[b] = h;
  }
  return keys;
}

bool NearDupIndex::has_near_duplicate(const std::vector<std::uint64_t>& shingles) const {
  const auto keys = band_keys(shingles);
  for (std::size_t b = 0; b < keys.size(); ++b) {
    const auto it = buckets_[b].find(keys[b]);
    if (it == buckets_[b].end()) continue;
    for (std::size_t id : it->second) {
      if (jaccard(items_[id], shingles) >= options_.threshold) return true;
    }
  }
  return false;
}

void NearDupIndex::insert(std::vector<std::uint64_t> shingles) {
  const auto keys = band_keys(shingles);
  const std::size_t id = items_.size();
  items_.push_back(std::move(shingles));
  for (std::size_t b = 0; b < keys.size(); ++b) buckets_[b][keys[b]].push_back(id);
}

}  // namespace merkit
