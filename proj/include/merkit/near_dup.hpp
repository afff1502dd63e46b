#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace merkit {

struct NearDupOptions {
  bool enabled = false;
  double threshold = 0.9;  // Jaccard similarity over token shingles
  std::size_t shingle = 3;
  std::size_t num_perm = 128;
  std::size_t bands = 32;  // num_perm must be divisible by bands
  std::uint64_t seed = 0x6d696e68617368ULL;
};

// Sorted, unique hashes of token n-grams of `text` (LaTeX tokens when it lexes,
// Unicode scalars otherwise). Texts shorter than n yield a single shingle.
std::vector<std::uint64_t> shingle_hashes(std::string_view text, std::size_t n);

// Exact Jaccard similarity of two sorted unique hash sets.
double jaccard(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b);

class MinHasher {
 public:
  MinHasher(std::size_t num_perm, std::uint64_t seed);
  std::vector<std::uint64_t> signature(const std::vector<std::uint64_t>& shingles) const;

 private:
  std::vector<std::uint64_t> salts_;
};

// LSH banding index. Candidates from shared buckets are confirmed with exact
// Jaccard, so the index never reports a pair below the threshold.
class NearDupIndex {
 public:
  explicit NearDupIndex(const NearDupOptions& options);

  // True when an already inserted item reaches the threshold against `shingles`.
  bool has_near_duplicate(const std::vector<std::uint64_t>& shingles) const;
  void insert(std::vector<std::uint64_t> shingles);

 private:
  std::vector<std::uint64_t> band_keys(const std::vector<std::uint64_t>& shingles) const;

  NearDupOptions options_;
  MinHasher hasher_;
  std::vector<std::vector<std::uint64_t>> items_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::size_t>>> buckets_;
};

}  // namespace merkit
